//! LLR-domain successive-cancellation recursion.
//!
//! [`ScState`] walks the decoding tree of `x = u G_n` one input index at a
//! time. Fed with channel LLRs it is an SC decoder; fed with the constant
//! prior LLR `log((1-p)/p)` it returns, for each index, the log-ratio of
//! `P(U_i = 0 | u_0^{i-1})` to `P(U_i = 1 | u_0^{i-1})`, which is what the
//! shaped encoder and the source-entropy estimator consume. Both uses, and the
//! list engine, go through the same [`check_node`] and [`bit_node`] functions.
//!
//! Layout: layer `k` holds `2^k` values at offsets `[2^k, 2^(k+1))`; layer
//! `n` holds the input LLRs.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::polar::log2_len;
use crate::Result;

/// Path-metric increment used by list encoding and list decoding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `ln(1 + exp(-(1 - 2u) L))`.
    #[default]
    Exact,
    /// `|L|` when the decision disagrees with the sign of `L`, else 0.
    Hard,
}

/// Arithmetic of the check-node (f) update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckNode {
    /// `2 atanh(tanh(a/2) tanh(b/2))`.
    #[default]
    Exact,
    MinSum,
}

/// Exact check-node update, evaluated as
/// `sign(a) sign(b) min(|a|, |b|) + ln(1 + e^-|a+b|) - ln(1 + e^-|a-b|)`,
/// which stays finite for large magnitudes.
#[inline]
pub fn f_exact(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    let signed = if (a < 0.0) != (b < 0.0) { -m } else { m };
    let es = libm::exp(-(a + b).abs());
    let ed = libm::exp(-(a - b).abs());
    signed + libm::log1p((es - ed) / (1.0 + ed))
}

#[inline]
pub fn f_min_sum(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

#[inline]
pub fn check_node(a: f64, b: f64, mode: CheckNode) -> f64 {
    match mode {
        CheckNode::Exact => f_exact(a, b),
        CheckNode::MinSum => f_min_sum(a, b),
    }
}

/// Bit-node (g) update given the partial sum `u` of the left branch.
#[inline]
pub fn bit_node(a: f64, b: f64, u: u8) -> f64 {
    if u == 0 {
        b + a
    } else {
        b - a
    }
}

/// 1 when `llr < 0`, else 0.
#[inline]
pub fn hard_decision(llr: f64) -> u8 {
    (llr < 0.0) as u8
}

/// `P(U = 0)` for a log-ratio `llr`.
#[inline]
pub fn prob_zero(llr: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-llr))
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + libm::log1p(libm::exp(-x.abs()))
}

/// `-ln P(U = u)` for a log-ratio `llr`, in nats.
#[inline]
pub fn neg_log_prob(llr: f64, u: u8) -> f64 {
    if u == 0 {
        softplus(-llr)
    } else {
        softplus(llr)
    }
}

/// Path-metric increment for deciding `u` at a bit with LLR `llr`.
#[inline]
pub fn penalty(llr: f64, u: u8, metric: Metric) -> f64 {
    match metric {
        Metric::Exact => neg_log_prob(llr, u),
        Metric::Hard => {
            if u != hard_decision(llr) {
                llr.abs()
            } else {
                0.0
            }
        }
    }
}

/// Computes layer `k` from layer `k + 1` with the check-node update.
#[inline]
pub(crate) fn f_layer(dst: &mut [f64], src: &[f64], mode: CheckNode) {
    let half = dst.len();
    let (a, b) = src.split_at(half);
    match mode {
        CheckNode::Exact => {
            for ((d, &x), &y) in dst.iter_mut().zip(a).zip(b) {
                *d = f_exact(x, y);
            }
        }
        CheckNode::MinSum => {
            for ((d, &x), &y) in dst.iter_mut().zip(a).zip(b) {
                *d = f_min_sum(x, y);
            }
        }
    }
}

/// Computes layer `k` from layer `k + 1` and the left partial sums.
#[inline]
pub(crate) fn g_layer(dst: &mut [f64], src: &[f64], left: &[u8]) {
    let half = dst.len();
    let (a, b) = src.split_at(half);
    for (((d, &x), &y), &u) in dst.iter_mut().zip(a).zip(b).zip(left) {
        *d = bit_node(x, y, u);
    }
}

/// Single-path SC state.
#[derive(Debug, Clone)]
pub struct ScState {
    layers: u32,
    len: usize,
    llr: Vec<f64>,
    partial: Vec<u8>,
    scratch: Vec<u8>,
    mode: CheckNode,
    next: usize,
    ready: bool,
}

impl ScState {
    pub fn new(len: usize, mode: CheckNode) -> Result<Self> {
        let layers = log2_len(len)?;
        Ok(Self {
            layers,
            len,
            llr: vec![0.0; 2 * len],
            partial: vec![0; len.max(1)],
            scratch: vec![0; len],
            mode,
            next: 0,
            ready: false,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Index of the next bit to be decided.
    pub fn position(&self) -> usize {
        self.next
    }

    /// Restarts with the given input LLRs.
    pub fn reset(&mut self, llrs: &[f64]) {
        assert_eq!(llrs.len(), self.len, "LLR block length");
        self.llr[self.len..].copy_from_slice(llrs);
        self.next = 0;
        self.ready = false;
    }

    /// Restarts with every input LLR equal to `llr`.
    pub fn reset_constant(&mut self, llr: f64) {
        self.llr[self.len..].fill(llr);
        self.next = 0;
        self.ready = false;
    }

    /// LLR of the next bit given all previously pushed bits.
    pub fn decision_llr(&mut self) -> f64 {
        assert!(self.next < self.len, "all bits already decided");
        if !self.ready {
            let i = self.next;
            let top = if i == 0 { self.layers } else { i.trailing_zeros() + 1 };
            for k in (0..top).rev() {
                let size = 1usize << k;
                let (lo, hi) = self.llr.split_at_mut(2 * size);
                let dst = &mut lo[size..];
                let src = &hi[..2 * size];
                if i != 0 && k == top - 1 {
                    g_layer(dst, src, &self.partial[size..2 * size]);
                } else {
                    f_layer(dst, src, self.mode);
                }
            }
            self.ready = true;
        }
        self.llr[1]
    }

    /// Decides the next bit. Computes its LLR first if that has not happened.
    pub fn push_bit(&mut self, u: u8) {
        self.decision_llr();
        let i = self.next;
        self.scratch[0] = u;
        for k in 0..self.layers {
            let size = 1usize << k;
            let left = &self.partial[size..2 * size];
            if (i >> k) & 1 == 0 {
                self.partial[size..2 * size].copy_from_slice(&self.scratch[..size]);
                break;
            }
            let (cur, upper) = self.scratch.split_at_mut(size);
            upper[..size].copy_from_slice(cur);
            for (c, &l) in cur.iter_mut().zip(left) {
                *c ^= l;
            }
        }
        self.next += 1;
        self.ready = false;
    }

    /// The codeword `x = u G_n` once every bit has been pushed.
    pub fn codeword(&self) -> Option<&[u8]> {
        (self.next == self.len).then_some(&self.scratch[..])
    }
}
