//! Monte Carlo code construction.
//!
//! Two orderings are estimated per input index: the source entropy
//! `H(U_i | U_0^{i-1})` under the target input distribution (prior-only SC
//! with randomized rounding), and an error count of a genie-aided SC decoder
//! over the channel at the design SNR, which orders `H(U_i | U_0^{i-1}, Y)`.
//! The `D` lowest-entropy indices become dynamic, the `N - K - D` most
//! error-prone of the rest become frozen, and the remainder carry data.
//!
//! Trials are seeded individually from `(seed, trial index)`, so a range of
//! trials can be accumulated anywhere and merged.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, prior_llr, LLR_CLIP};
use crate::code::{info_len_for, shaping_limit, CodeSpec, IndexClass};
use crate::crc::CrcConfig;
use crate::encoder::randomized_round;
use crate::kernel::{hard_decision, neg_log_prob, prob_zero, CheckNode, ScState};
use crate::polar::{log2_len, transform_in_place};
use crate::seed::{rng_for, stream};
use crate::{Error, Result};

const LOG2_E: f64 = core::f64::consts::LOG2_E;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationStats {
    pub len: usize,
    /// Sample mean of `-log2 P(u_i | u_0^{i-1})`, in bits.
    pub source_entropy: Vec<f64>,
    pub source_trials: u64,
    /// Genie-aided SC decision errors per index.
    pub channel_errors: Vec<u64>,
    pub channel_trials: u64,
}

/// Running sums of `-log2 P(u_i | u_0^{i-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceEntropyAcc {
    pub sums: Vec<f64>,
    pub trials: u64,
}

impl SourceEntropyAcc {
    pub fn new(len: usize) -> Self {
        Self { sums: vec![0.0; len], trials: 0 }
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        self.trials += other.trials;
    }

    pub fn means(&self) -> Vec<f64> {
        let t = self.trials.max(1) as f64;
        self.sums.iter().map(|s| s / t).collect()
    }
}

/// Runs source trials `trials` and adds them to `acc`.
pub fn accumulate_source_entropies(
    p: f64,
    trials: Range<u64>,
    seed: u64,
    acc: &mut SourceEntropyAcc,
) -> Result<()> {
    let len = acc.sums.len();
    let mut sc = ScState::new(len, CheckNode::Exact)?;
    let prior = prior_llr(p);
    for trial in trials {
        let mut rng = rng_for(seed, stream::SOURCE_TRIAL, trial);
        sc.reset_constant(prior);
        for sum in acc.sums.iter_mut() {
            let l = sc.decision_llr();
            let u = randomized_round(prob_zero(l), &mut rng);
            *sum += neg_log_prob(l, u) * LOG2_E;
            sc.push_bit(u);
        }
        acc.trials += 1;
    }
    Ok(())
}

/// Estimates `H(U_i | U_0^{i-1})` for every index.
pub fn estimate_source_entropies(len: usize, p: f64, trials: u64, seed: u64) -> Result<Vec<f64>> {
    log2_len(len)?;
    check_p(p)?;
    let mut acc = SourceEntropyAcc::new(len);
    accumulate_source_entropies(p, 0..trials, seed, &mut acc)?;
    Ok(acc.means())
}

/// Runs genie-aided channel trials `trials` and adds decision errors to
/// `counts`. `amplitude` is the OOK amplitude; input LLRs include the prior.
pub fn accumulate_channel_errors(
    p: f64,
    amplitude: f64,
    trials: Range<u64>,
    seed: u64,
    counts: &mut [u64],
) -> Result<()> {
    let len = counts.len();
    let mut sc = ScState::new(len, CheckNode::Exact)?;
    let prior = prior_llr(p);
    let mut u = vec![0u8; len];
    let mut llrs = vec![0.0f64; len];
    for trial in trials {
        let mut rng = rng_for(seed, stream::CHANNEL_TRIAL, trial);
        // A randomized-rounding draw of u from the prior-only recursion makes
        // x = u G_n i.i.d. Bernoulli(p), so sample x directly.
        for b in u.iter_mut() {
            *b = (rng.random::<f64>() < p) as u8;
        }
        for (l, &x) in llrs.iter_mut().zip(&u) {
            let noise: f64 = rng.sample(StandardNormal);
            let y = amplitude * f64::from(x) + noise;
            *l = (0.5 * amplitude * amplitude - amplitude * y + prior).clamp(-LLR_CLIP, LLR_CLIP);
        }
        transform_in_place(&mut u)?;
        sc.reset(&llrs);
        for (count, &truth) in counts.iter_mut().zip(&u) {
            if hard_decision(sc.decision_llr()) != truth {
                *count += 1;
            }
            sc.push_bit(truth);
        }
    }
    Ok(())
}

/// Genie-aided SC error counts at `design_snr_db`.
pub fn estimate_channel_reliability(
    len: usize,
    p: f64,
    design_snr_db: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<u64>> {
    log2_len(len)?;
    check_p(p)?;
    let amplitude = libm::sqrt(db_to_linear(design_snr_db) / p);
    let mut counts = vec![0u64; len];
    accumulate_channel_errors(p, amplitude, 0..trials, seed, &mut counts)?;
    Ok(counts)
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Both estimates with the same seed.
pub fn estimate_stats(
    len: usize,
    p: f64,
    design_snr_db: f64,
    source_trials: u64,
    channel_trials: u64,
    seed: u64,
) -> Result<PolarizationStats> {
    Ok(PolarizationStats {
        len,
        source_entropy: estimate_source_entropies(len, p, source_trials, seed)?,
        source_trials,
        channel_errors: estimate_channel_reliability(len, p, design_snr_db, channel_trials, seed)?,
        channel_trials,
    })
}

/// Parameters of [`build_code_spec`] besides the statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub len: usize,
    pub rate: f64,
    pub p: f64,
    pub dynamic_len: usize,
    pub crc: CrcConfig,
    pub design_snr_db: f64,
    pub seed: u64,
}

/// Selects dynamic, frozen and information sets from `stats`.
///
/// Ties in either statistic go to the lower index.
pub fn build_code_spec(params: &CodeParams, stats: &PolarizationStats) -> Result<CodeSpec> {
    let len = params.len;
    let n = log2_len(len)?;
    if len < 2 {
        return Err(Error::NotPowerOfTwo(len));
    }
    check_p(params.p)?;
    if !(params.rate > 0.0 && params.rate <= 1.0) {
        return Err(Error::InvalidRate(params.rate));
    }
    params.crc.validate()?;
    if stats.len != len || stats.source_entropy.len() != len || stats.channel_errors.len() != len {
        return Err(Error::StatsLength { expected: len, got: stats.source_entropy.len() });
    }
    let info_len = info_len_for(len, params.rate);
    let budget = len - info_len;
    if params.dynamic_len > budget {
        return Err(Error::DynamicBudget { dynamic: params.dynamic_len, budget });
    }
    if info_len < params.crc.width() {
        return Err(Error::CrcTooLong { info: info_len, crc: params.crc.width() });
    }

    let mut classes = vec![IndexClass::Information; len];
    let mut by_entropy: Vec<usize> = (0..len).collect();
    by_entropy.sort_by(|&a, &b| {
        stats.source_entropy[a].total_cmp(&stats.source_entropy[b]).then(a.cmp(&b))
    });
    for &i in &by_entropy[..params.dynamic_len] {
        classes[i] = IndexClass::Dynamic;
    }
    let mut by_errors: Vec<usize> =
        (0..len).filter(|&i| classes[i] != IndexClass::Dynamic).collect();
    by_errors.sort_by(|&a, &b| stats.channel_errors[b].cmp(&stats.channel_errors[a]).then(a.cmp(&b)));
    for &i in &by_errors[..budget - params.dynamic_len] {
        classes[i] = IndexClass::Frozen;
    }

    let frozen_count = budget - params.dynamic_len;
    let mut rng = rng_for(params.seed, stream::FROZEN, 0);
    let frozen_values = (0..frozen_count).map(|_| rng.random::<bool>() as u8).collect();

    let spec = CodeSpec {
        len,
        n,
        rate: params.rate,
        info_len,
        p: params.p,
        dynamic_len: params.dynamic_len,
        classes,
        frozen_values,
        crc: params.crc,
        design_snr_db: params.design_snr_db,
        seed: params.seed,
        source_trials: stats.source_trials,
        channel_trials: stats.channel_trials,
        below_shaping_limit: params.dynamic_len < shaping_limit(len, params.p),
    };
    spec.validate()?;
    Ok(spec)
}
