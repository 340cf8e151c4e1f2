//! Finite-length rate loss of distribution matchers with binary output.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::channel::h2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Matcher {
    Ccdm,
    PolarArgmax,
    PolarList { list_size: usize },
}

impl Matcher {
    pub fn label(&self) -> alloc::string::String {
        match self {
            Matcher::Ccdm => "ccdm".into(),
            Matcher::PolarArgmax => "polar_argmax".into(),
            Matcher::PolarList { list_size } => alloc::format!("polar_list{list_size}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateLossPoint {
    pub len: usize,
    pub matcher: Matcher,
    /// Number of dynamic positions; `None` for CCDM.
    pub dynamic_len: Option<usize>,
    pub p: f64,
    pub rate_loss: f64,
}

/// `H2(p) - (N - D) / N`.
pub fn polar_dm_rate_loss(len: usize, p: f64, dynamic_len: usize) -> f64 {
    h2(p) - (len - dynamic_len) as f64 / len as f64
}

/// Number of zeros in the constant composition for ones-probability `p`:
/// nearest integer to `(1 - p) N`, ties towards more zeros.
pub fn ccdm_zero_count(len: usize, p: f64) -> usize {
    let zeros = libm::floor((1.0 - p) * len as f64 + 0.5);
    zeros.clamp(0.0, len as f64) as usize
}

/// `C(n, k)` exactly.
pub fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// `floor(log2 C(n, k))`.
pub fn log2_binomial_floor(n: u64, k: u64) -> u64 {
    assert!(k <= n, "k must not exceed n");
    binomial(n, k).bits() - 1
}

/// `H2(p) - floor(log2 C(N, n0)) / N` with `n0` from [`ccdm_zero_count`].
pub fn ccdm_rate_loss(len: usize, p: f64) -> f64 {
    let zeros = ccdm_zero_count(len, p) as u64;
    h2(p) - log2_binomial_floor(len as u64, zeros) as f64 / len as f64
}
