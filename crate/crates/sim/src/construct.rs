//! Code construction with trials spread over the rayon pool.

use ookpolar_core::channel::db_to_linear;
use ookpolar_core::construction::{
    accumulate_channel_errors, accumulate_source_entropies, build_code_spec, CodeParams, SourceEntropyAcc,
};
use ookpolar_core::{CodeSpec, PolarizationStats};
use rayon::prelude::*;

use crate::error::Result;
use crate::spec_io::{StatsCache, StatsKey};

/// Trials per work item. Fixed so that results do not depend on the pool size.
pub const TRIAL_CHUNK: u64 = 128;

fn chunks(trials: u64) -> Vec<(u64, u64)> {
    (0..trials).step_by(TRIAL_CHUNK as usize).map(|s| (s, (s + TRIAL_CHUNK).min(trials))).collect()
}

/// Same values as `estimate_stats` up to floating-point summation order,
/// identical for any number of threads.
pub fn parallel_stats(key: &StatsKey) -> Result<PolarizationStats> {
    let len = key.len;
    let p = key.p;
    let source: Vec<SourceEntropyAcc> = chunks(key.source_trials)
        .into_par_iter()
        .map(|(a, b)| {
            let mut acc = SourceEntropyAcc::new(len);
            accumulate_source_entropies(p, a..b, key.seed, &mut acc).map(|_| acc)
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut total = SourceEntropyAcc::new(len);
    for acc in &source {
        total.merge(acc);
    }

    let amplitude = (db_to_linear(key.design_snr_db) / p).sqrt();
    let counts: Vec<Vec<u64>> = chunks(key.channel_trials)
        .into_par_iter()
        .map(|(a, b)| {
            let mut counts = vec![0u64; len];
            accumulate_channel_errors(p, amplitude, a..b, key.seed, &mut counts).map(|_| counts)
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut channel_errors = vec![0u64; len];
    for c in &counts {
        for (t, v) in channel_errors.iter_mut().zip(c) {
            *t += v;
        }
    }

    Ok(PolarizationStats {
        len,
        source_entropy: total.means(),
        source_trials: key.source_trials,
        channel_errors,
        channel_trials: key.channel_trials,
    })
}

/// Stats from `cache` if present, computed and stored otherwise.
pub fn cached_stats(key: &StatsKey, cache: Option<&StatsCache>) -> Result<PolarizationStats> {
    if let Some(stats) = cache.and_then(|c| c.load(key)) {
        return Ok(stats);
    }
    let stats = parallel_stats(key)?;
    if let Some(c) = cache {
        c.store(key, &stats)?;
    }
    Ok(stats)
}

pub fn construct(
    params: &CodeParams,
    source_trials: u64,
    channel_trials: u64,
    cache: Option<&StatsCache>,
) -> Result<CodeSpec> {
    let key = StatsKey {
        len: params.len,
        p: params.p,
        design_snr_db: params.design_snr_db,
        seed: params.seed,
        source_trials,
        channel_trials,
    };
    let stats = cached_stats(&key, cache)?;
    Ok(build_code_spec(params, &stats)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ookpolar_core::construction::estimate_stats;

    #[test]
    fn matches_sequential_estimate() {
        let key = StatsKey { len: 64, p: 0.3, design_snr_db: 2.0, seed: 9, source_trials: 300, channel_trials: 300 };
        let par = parallel_stats(&key).unwrap();
        let seq = estimate_stats(64, 0.3, 2.0, 300, 300, 9).unwrap();
        assert_eq!(par.channel_errors, seq.channel_errors);
        for (a, b) in par.source_entropy.iter().zip(&seq.source_entropy) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn chunking_covers_range() {
        assert_eq!(chunks(0), vec![]);
        assert_eq!(chunks(TRIAL_CHUNK + 1), vec![(0, TRIAL_CHUNK), (TRIAL_CHUNK, TRIAL_CHUNK + 1)]);
    }
}
