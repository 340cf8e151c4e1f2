//! Rate loss of CCDM and of the polar distribution matcher versus length.
//!
//! The polar matcher of length `N` with `D` dynamic positions carries
//! `N - D` data bits and no frozen bits. For each length the sweep looks for
//! the smallest `D` at which the mean ones-fraction of the matcher output
//! stays within `tolerance` above the target. With zero tolerance the
//! output matches the target on average and the loss cannot be negative
//! beyond Monte Carlo noise.

use std::path::Path;

use ookpolar_core::channel::h2_inverse;
use ookpolar_core::construction::{build_code_spec, CodeParams};
use ookpolar_core::encoder::mean_ones_fraction;
use ookpolar_core::rate_loss::{ccdm_rate_loss, polar_dm_rate_loss, Matcher, RateLossPoint};
use ookpolar_core::{CodeSpec, CrcConfig, EncodeRule, PolarizationStats};

use crate::construct::parallel_stats;
use crate::error::{Error, Result};
use crate::spec_io::StatsKey;

#[derive(Debug, Clone, PartialEq)]
pub struct RateLossSweep {
    pub lens: Vec<usize>,
    /// Data bits per output symbol.
    pub dm_rate: f64,
    pub list_sizes: Vec<usize>,
    pub frames: u64,
    pub tolerance: f64,
    pub source_trials: u64,
    pub seed: u64,
}

impl Default for RateLossSweep {
    fn default() -> Self {
        Self {
            lens: vec![64, 256, 1024, 4096],
            dm_rate: 0.5,
            list_sizes: vec![32],
            frames: 200,
            tolerance: 0.0,
            source_trials: 1000,
            seed: 1,
        }
    }
}

/// Matcher-only code: `D` lowest-entropy positions dynamic, the rest data.
pub fn dm_spec(stats: &PolarizationStats, p: f64, dynamic_len: usize, seed: u64) -> Result<CodeSpec> {
    let len = stats.len;
    let params = CodeParams {
        len,
        rate: (len - dynamic_len) as f64 / len as f64,
        p,
        dynamic_len,
        crc: CrcConfig::none(),
        design_snr_db: 0.0,
        seed,
    };
    Ok(build_code_spec(&params, stats)?)
}

/// Smallest `D` whose mean ones-fraction is at most `p + tolerance`,
/// by bisection on `D`.
pub fn min_dynamic(stats: &PolarizationStats, p: f64, rule: EncodeRule, sweep: &RateLossSweep) -> Result<usize> {
    let ok = |d: usize| -> Result<bool> {
        let spec = dm_spec(stats, p, d, sweep.seed)?;
        Ok(mean_ones_fraction(&spec, rule, sweep.frames, sweep.seed)? <= p + sweep.tolerance)
    };
    let (mut lo, mut hi) = (0usize, stats.len - 1);
    if ok(lo)? {
        return Ok(lo);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub fn run(sweep: &RateLossSweep) -> Result<Vec<RateLossPoint>> {
    if !(sweep.dm_rate > 0.0 && sweep.dm_rate < 1.0) {
        return Err(Error::Config(format!("DM rate {} outside (0, 1)", sweep.dm_rate)));
    }
    let p = h2_inverse(sweep.dm_rate);
    let mut points = Vec::new();
    for &len in &sweep.lens {
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::Config(format!("length {len} is not a power of two >= 2")));
        }
        points.push(RateLossPoint {
            len,
            matcher: Matcher::Ccdm,
            dynamic_len: None,
            p,
            rate_loss: ccdm_rate_loss(len, p),
        });
        let key = StatsKey {
            len,
            p,
            design_snr_db: 0.0,
            seed: sweep.seed,
            source_trials: sweep.source_trials,
            channel_trials: 0,
        };
        let stats = parallel_stats(&key)?;
        let mut matchers = vec![(Matcher::PolarArgmax, EncodeRule::Argmax)];
        for &list_size in &sweep.list_sizes {
            matchers.push((Matcher::PolarList { list_size }, EncodeRule::List { list_size }));
        }
        for (matcher, rule) in matchers {
            let d = min_dynamic(&stats, p, rule, sweep)?;
            points.push(RateLossPoint {
                len,
                matcher,
                dynamic_len: Some(d),
                p,
                rate_loss: polar_dm_rate_loss(len, p, d),
            });
        }
    }
    Ok(points)
}

pub fn write_csv(path: &Path, points: &[RateLossPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["N", "matcher", "D", "p", "rate_loss"])?;
    for pt in points {
        w.write_record([
            pt.len.to_string(),
            pt.matcher.label(),
            pt.dynamic_len.map(|d| d.to_string()).unwrap_or_default(),
            pt.p.to_string(),
            pt.rate_loss.to_string(),
        ])?;
    }
    w.flush().map_err(Error::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dm_spec_has_no_frozen_bits() {
        let key = StatsKey { len: 32, p: 0.2, design_snr_db: 0.0, seed: 3, source_trials: 100, channel_trials: 0 };
        let stats = parallel_stats(&key).unwrap();
        let spec = dm_spec(&stats, 0.2, 12, 3).unwrap();
        assert_eq!(spec.frozen_len(), 0);
        assert_eq!(spec.payload_len(), 20);
    }

    #[test]
    fn small_sweep_rows() {
        let sweep = RateLossSweep { lens: vec![16], frames: 50, source_trials: 200, ..Default::default() };
        let pts = run(&sweep).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0].matcher, Matcher::Ccdm);
        for pt in &pts[1..] {
            let d = pt.dynamic_len.unwrap();
            assert!(d < 16);
        }
    }
}
