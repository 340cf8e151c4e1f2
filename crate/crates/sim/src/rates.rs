//! Achievable rates of OOK over AWGN with uniform and optimized inputs.

use std::path::Path;

use ookpolar_core::channel::{
    db_to_linear, mutual_information_with, optimize_p_with, snr_db_for_rate, GaussHermite,
};
use serde::Serialize;

use crate::error::{Error, Result};

pub const GRID_POINTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub snr_db: f64,
    pub uniform: f64,
    pub optimized: f64,
    pub p_opt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateGap {
    pub rate: f64,
    pub uniform_snr_db: f64,
    pub optimized_snr_db: f64,
    pub p_opt: f64,
    pub gap_db: f64,
}

/// Both curves on `lo_db..=hi_db` in steps of `step_db`.
pub fn rate_curves(lo_db: f64, hi_db: f64, step_db: f64) -> Result<Vec<RatePoint>> {
    if !(step_db > 0.0 && hi_db >= lo_db) {
        return Err(Error::Config(format!("bad SNR grid {lo_db}..{hi_db} step {step_db}")));
    }
    let rule = GaussHermite::default();
    let steps = ((hi_db - lo_db) / step_db + 1e-9).floor() as usize;
    (0..=steps)
        .map(|i| {
            let snr_db = lo_db + i as f64 * step_db;
            let gamma = db_to_linear(snr_db);
            let opt = optimize_p_with(gamma, GRID_POINTS, &rule)?;
            Ok(RatePoint {
                snr_db,
                uniform: mutual_information_with(0.5, gamma, &rule)?,
                optimized: opt.rate,
                p_opt: opt.p,
            })
        })
        .collect()
}

/// SNRs at which the two curves reach `rate` and their difference.
pub fn gap_at_rate(rate: f64) -> Result<RateGap> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Config(format!("target rate {rate} outside (0, 1)")));
    }
    let rule = GaussHermite::default();
    let uniform_snr_db =
        snr_db_for_rate(rate, -30.0, 30.0, |g| mutual_information_with(0.5, g, &rule).unwrap_or(0.0));
    let optimized_snr_db = snr_db_for_rate(rate, -30.0, 30.0, |g| {
        optimize_p_with(g, GRID_POINTS, &rule).map(|o| o.rate).unwrap_or(0.0)
    });
    let p_opt = optimize_p_with(db_to_linear(optimized_snr_db), GRID_POINTS, &rule)?.p;
    Ok(RateGap { rate, uniform_snr_db, optimized_snr_db, p_opt, gap_db: uniform_snr_db - optimized_snr_db })
}

pub fn write_csv(path: &Path, points: &[RatePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in points {
        w.serialize(p)?;
    }
    w.flush().map_err(Error::io(path))
}
