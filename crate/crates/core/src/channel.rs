//! On-off keying over the AWGN channel `Y = a X + N` with `X` in {0, 1},
//! `P(X = 1) = p` and unit-variance noise. The SNR is `p a^2`.

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::seed::SimRng;
use crate::{Error, Result};

/// Default LLR magnitude bound (natural-log units).
pub const LLR_CLIP: f64 = 40.0;

const LN_2: f64 = core::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub amplitude: f64,
    /// Probability of transmitting a one.
    pub p: f64,
}

impl ChannelParams {
    pub fn new(amplitude: f64, p: f64) -> Result<Self> {
        check_probability(p)?;
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidSnr(amplitude));
        }
        Ok(Self { amplitude, p })
    }

    /// Parameters reaching linear SNR `gamma` with ones-probability `p`.
    pub fn from_snr(gamma: f64, p: f64) -> Result<Self> {
        check_probability(p)?;
        check_snr(gamma)?;
        Ok(Self { amplitude: libm::sqrt(gamma / p), p })
    }

    pub fn snr(&self) -> f64 {
        self.p * self.amplitude * self.amplitude
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

fn check_snr(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSnr(gamma))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn linear_to_db(gamma: f64) -> f64 {
    10.0 * libm::log10(gamma)
}

/// Binary entropy in bits; 0 at the endpoints.
pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * libm::log2(p) + (1.0 - p) * libm::log2(1.0 - p))
}

/// Inverse of `h2` on `(0, 0.5]`.
pub fn h2_inverse(h: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `log(P(X=0) / P(X=1))`.
pub fn prior_llr(p: f64) -> f64 {
    libm::log((1.0 - p) / p)
}

/// Adds `a x_i + n_i` into `out` using standard normal draws from `rng`.
pub fn add_noise(x: &[u8], amplitude: f64, rng: &mut SimRng, out: &mut Vec<f64>) {
    out.clear();
    out.extend(x.iter().map(|&b| {
        let n: f64 = rng.sample(StandardNormal);
        amplitude * f64::from(b) + n
    }));
}

/// Samples the channel output for codeword `x`, reproducibly from `rng_seed`.
pub fn channel_sample(x: &[u8], params: &ChannelParams, rng_seed: u64) -> Vec<f64> {
    use rand::SeedableRng;
    let mut rng = SimRng::seed_from_u64(rng_seed);
    let mut y = Vec::with_capacity(x.len());
    add_noise(x, params.amplitude, &mut rng, &mut y);
    y
}

/// `log[P(y|0)/P(y|1)]`, optionally plus the prior term, clipped to `±clip`.
pub fn channel_llr(y: f64, params: &ChannelParams, include_prior: bool, clip: f64) -> f64 {
    let a = params.amplitude;
    let mut l = 0.5 * a * a - a * y;
    if include_prior {
        l += prior_llr(params.p);
    }
    l.clamp(-clip, clip)
}

/// Channel LLRs for a whole received block.
pub fn channel_llrs(y: &[f64], params: &ChannelParams, include_prior: bool, clip: f64, out: &mut Vec<f64>) {
    out.clear();
    let prior = if include_prior { prior_llr(params.p) } else { 0.0 };
    let a = params.amplitude;
    out.extend(y.iter().map(|&v| (0.5 * a * a - a * v + prior).clamp(-clip, clip)));
}

/// Gauss–Hermite rule for expectations over a standard normal variable.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Nodes by Newton iteration on the normalized Hermite recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 2, "Gauss–Hermite order must be at least 2");
        let n = order;
        let nf = n as f64;
        let pim4 = 0.751_125_544_464_942_5; // pi^(-1/4)
        let mut t = alloc::vec![0.0f64; n];
        let mut w = alloc::vec![0.0f64; n];
        let mut z = 0.0f64;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => libm::sqrt(2.0 * nf + 1.0) - 1.855_75 * libm::pow(2.0 * nf + 1.0, -1.0 / 6.0),
                1 => z - 1.14 * libm::pow(nf, 0.426) / z,
                2 => 1.86 * z - 0.86 * t[0],
                3 => 1.91 * z - 0.91 * t[1],
                _ => 2.0 * z - t[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * libm::sqrt(2.0 / jf) * p2 - libm::sqrt((jf - 1.0) / jf) * p3;
                }
                pp = libm::sqrt(2.0 * nf) * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if libm::fabs(z - z1) <= 1e-14 {
                    break;
                }
            }
            t[i] = z;
            t[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        let sqrt_pi = libm::sqrt(core::f64::consts::PI);
        Self {
            nodes: t.iter().map(|v| core::f64::consts::SQRT_2 * v).collect(),
            weights: w.iter().map(|v| v / sqrt_pi).collect(),
        }
    }

    /// `E[g(Z)]` for `Z ~ N(0, 1)`.
    pub fn expect(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * g(z)).sum()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Default for GaussHermite {
    fn default() -> Self {
        Self::new(64)
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

/// `I(X;Y)` in bits using the given quadrature rule.
pub fn mutual_information_with(p: f64, gamma: f64, rule: &GaussHermite) -> Result<f64> {
    check_probability(p)?;
    check_snr(gamma)?;
    let a = libm::sqrt(gamma / p);
    let half = 0.5 * a * a;
    let (ln_p, ln_q) = (libm::log(p), libm::log(1.0 - p));
    // E[-log2 of the mixture density ratio] for each transmitted symbol.
    let zero = rule.expect(|z| log_add_exp(ln_q, ln_p + a * z - half));
    let one = rule.expect(|z| log_add_exp(ln_p, ln_q - a * z - half));
    let mi = -((1.0 - p) * zero + p * one) / LN_2;
    Ok(mi.clamp(0.0, h2(p)))
}

/// `I(X;Y)` in bits with the default 64-point rule.
pub fn mutual_information(p: f64, gamma: f64) -> Result<f64> {
    mutual_information_with(p, gamma, &GaussHermite::default())
}

/// Optimal ones-probability and the rate it achieves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalInput {
    pub p: f64,
    pub rate: f64,
}

/// Maximizes `I(X;Y)` over `p` in `(0, 0.5]` at linear SNR `gamma`.
pub fn optimize_p(gamma: f64) -> Result<OptimalInput> {
    optimize_p_with(gamma, 100, &GaussHermite::default())
}

/// Grid search with `grid_points` points on `(0, 0.5]`, then golden-section
/// refinement inside the bracketing grid cell.
pub fn optimize_p_with(gamma: f64, grid_points: usize, rule: &GaussHermite) -> Result<OptimalInput> {
    check_snr(gamma)?;
    let step = 0.5 / grid_points as f64;
    let mi = |p: f64| mutual_information_with(p, gamma, rule).unwrap_or(0.0);
    let mut best = (step, mi(step));
    for k in 2..=grid_points {
        let p = step * k as f64;
        let v = mi(p);
        if v > best.1 {
            best = (p, v);
        }
    }
    let mut lo = (best.0 - step).max(1e-9);
    let mut hi = (best.0 + step).min(0.5);
    let ratio = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (mi(c), mi(d));
    while hi - lo > 1e-6 {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = mi(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = mi(d);
        }
    }
    let p = 0.5 * (lo + hi);
    let rate = mi(p);
    // The grid point can beat the refined point when the bracket ends at 0.5.
    Ok(if best.1 > rate { OptimalInput { p: best.0, rate: best.1 } } else { OptimalInput { p, rate } })
}

/// Smallest SNR (dB) at which `rate_at(gamma)` reaches `target`, by bisection
/// on `[lo_db, hi_db]`. `rate_at` must be non-decreasing in SNR.
pub fn snr_db_for_rate(target: f64, lo_db: f64, hi_db: f64, mut rate_at: impl FnMut(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (lo_db, hi_db);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if rate_at(db_to_linear(mid)) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Composite Simpson over the Gaussian density on [-40, 40] with the
    /// mixture written in terms of densities, independent of the
    /// Gauss–Hermite rewrite.
    fn mi_simpson(p: f64, gamma: f64) -> f64 {
        let a = libm::sqrt(gamma / p);
        let phi = |v: f64| libm::exp(-0.5 * v * v) / libm::sqrt(2.0 * core::f64::consts::PI);
        let integrand = |y: f64| {
            let f0 = phi(y);
            let f1 = phi(y - a);
            let mix = (1.0 - p) * f0 + p * f1;
            let mut s = 0.0;
            if mix <= 0.0 {
                return 0.0;
            }
            if f0 > 0.0 {
                s += (1.0 - p) * f0 * libm::log2(f0 / mix);
            }
            if f1 > 0.0 {
                s += p * f1 * libm::log2(f1 / mix);
            }
            s
        };
        let (lo, hi, n) = (-40.0, 40.0 + a, 200_000usize);
        let h = (hi - lo) / n as f64;
        let mut acc = integrand(lo) + integrand(hi);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * integrand(lo + h * k as f64);
        }
        acc * h / 3.0
    }

    #[test]
    fn gauss_hermite_moments() {
        let gh = GaussHermite::default();
        assert!((gh.expect(|_| 1.0) - 1.0).abs() < 1e-12);
        assert!(gh.expect(|z| z).abs() < 1e-12);
        assert!((gh.expect(|z| z * z) - 1.0).abs() < 1e-10);
        assert!((gh.expect(|z| z.powi(4)) - 3.0).abs() < 1e-9);
        assert!((gh.expect(libm::cos) - libm::exp(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn llr_examples() {
        let params = ChannelParams::new(1.0, 0.5).unwrap();
        assert!(channel_llr(0.5, &params, false, LLR_CLIP).abs() < 1e-15);
        // Density ratio at y = 0, a = 1, evaluated directly.
        let phi = |v: f64| libm::exp(-0.5 * v * v);
        let oracle = libm::log(phi(0.0) / phi(-1.0));
        assert!((channel_llr(0.0, &params, false, LLR_CLIP) - oracle).abs() < 1e-12);
        assert!((oracle - 0.5).abs() < 1e-12);

        let prior_only = ChannelParams::new(0.0, 0.2).unwrap();
        let l = channel_llr(3.0, &prior_only, true, LLR_CLIP);
        assert!((l - libm::log(4.0)).abs() < 1e-12);

        let strong = ChannelParams::new(100.0, 0.5).unwrap();
        assert_eq!(channel_llr(-10.0, &strong, false, LLR_CLIP), LLR_CLIP);
        assert_eq!(channel_llr(110.0, &strong, false, LLR_CLIP), -LLR_CLIP);
    }

    #[test]
    fn sampling_determinism_and_mean() {
        let x = vec![1u8; 1_000_000];
        let params = ChannelParams::new(2.0, 0.5).unwrap();
        let y1 = channel_sample(&x, &params, 99);
        assert_eq!(y1, channel_sample(&x, &params, 99));
        let mean = y1.iter().sum::<f64>() / y1.len() as f64;
        assert!((mean - 2.0).abs() < 0.01, "mean {mean}");

        let silent = ChannelParams::new(0.0, 0.5).unwrap();
        let zeros = vec![0u8; 1000];
        let ones = vec![1u8; 1000];
        assert_eq!(channel_sample(&zeros, &silent, 5), channel_sample(&ones, &silent, 5));
    }

    #[test]
    fn hard_decision_error_matches_q_function() {
        // x = 1, a = 2, no prior: error when y < 1, probability Q(1).
        let params = ChannelParams::new(2.0, 0.5).unwrap();
        let n = 400_000;
        let y = channel_sample(&vec![1u8; n], &params, 3);
        let errors = y.iter().filter(|&&v| channel_llr(v, &params, false, LLR_CLIP) > 0.0).count();
        let q1 = 0.5 * libm::erfc(1.0 / core::f64::consts::SQRT_2);
        let rate = errors as f64 / n as f64;
        let sigma = libm::sqrt(q1 * (1.0 - q1) / n as f64);
        assert!((rate - q1).abs() < 4.0 * sigma, "rate {rate} vs {q1}");
    }

    #[test]
    fn mi_matches_simpson_oracle() {
        for &p in &[0.05, 0.13, 0.3, 0.5] {
            for &db in &[-10.0, -3.0, 0.0, 6.0, 12.0] {
                let g = db_to_linear(db);
                let gh = mutual_information(p, g).unwrap();
                let oracle = mi_simpson(p, g);
                assert!((gh - oracle).abs() < 1e-4, "p={p} db={db}: {gh} vs {oracle}");
            }
        }
    }

    #[test]
    fn mi_limits_and_bounds() {
        assert!(mutual_information(0.3, 1e-9).unwrap() < 1e-8);
        assert!((mutual_information(0.5, db_to_linear(25.0)).unwrap() - 1.0).abs() < 1e-6);
        for &p in &[0.02, 0.1, 0.25, 0.5] {
            let mut prev = 0.0;
            for k in -40..=40 {
                let v = mutual_information(p, db_to_linear(k as f64 * 0.5)).unwrap();
                assert!(v <= h2(p) + 1e-12);
                assert!(v >= prev - 1e-12, "not monotone at p={p}, step {k}");
                prev = v;
            }
        }
        assert!(mutual_information(0.0, 1.0).is_err());
        assert!(mutual_information(1.0, 1.0).is_err());
        assert!(mutual_information(0.5, 0.0).is_err());
        assert!(mutual_information(0.5, -1.0).is_err());
    }

    #[test]
    fn optimize_p_against_grid_oracle() {
        let rule = GaussHermite::default();
        for &db in &[-6.0, -2.0, 0.0, 4.0, 10.0, 20.0] {
            let g = db_to_linear(db);
            let opt = optimize_p(g).unwrap();
            // Coarse grid oracle over p in {0.01, ..., 0.5}.
            let grid_best = (1..=50)
                .map(|k| k as f64 * 0.01)
                .map(|p| mutual_information_with(p, g, &rule).unwrap())
                .fold(0.0, f64::max);
            assert!(opt.rate >= grid_best - 1e-12, "db={db}");
            assert!(opt.p <= 0.5);
            assert!(opt.rate >= mutual_information(0.5, g).unwrap() - 1e-12);
            let dense = optimize_p_with(g, 200, &rule).unwrap();
            assert!((dense.p - opt.p).abs() < 1e-4, "db={db}: {} vs {}", dense.p, opt.p);
        }
        // Large SNR drives the optimum towards uniform.
        let high = optimize_p(db_to_linear(25.0)).unwrap();
        assert!(high.p > 0.45, "p* = {}", high.p);
    }

    #[test]
    fn shaping_gap_at_quarter_rate() {
        let uniform = snr_db_for_rate(0.25, -20.0, 20.0, |g| mutual_information(0.5, g).unwrap());
        let shaped = snr_db_for_rate(0.25, -20.0, 20.0, |g| optimize_p(g).unwrap().rate);
        let gap = uniform - shaped;
        assert!((gap - 2.0).abs() < 0.2, "gap {gap}");
    }

    #[test]
    fn h2_inverse_roundtrip() {
        for &p in &[0.01, 0.11, 0.3, 0.45] {
            assert!((h2_inverse(h2(p)) - p).abs() < 1e-9);
        }
    }
}
