//! Robust bias-corrected confidence intervals and uniform confidence bands.
//!
//! The interval for `F^{(ν)}(x)` is centred at the order-`q` fit computed
//! with the order-`p` bandwidth and uses the order-`q` standard error. With
//! `q == p` it reduces to the conventional interval around the point
//! estimate.
//!
//! Uniform bands take their critical value from a Gaussian multiplier
//! bootstrap on the influence representation of the order-`q` fits: each
//! replication draws one standard normal per design row (scaled by the root
//! of the row weight) from its own ChaCha8 stream, so results do not depend
//! on the number of threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bwselect::BandwidthResult;
use crate::ecdf::Sample;
use crate::error::{Error, Result};
use crate::kernel::{KernelKind, MAX_KERNEL_ORDER};
use crate::lpfit::{influence, Influence, Target};

/// Highest estimation order accepted from users.
pub const MAX_FIT_ORDER: usize = 7;

/// Orders and kernel of an estimation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitConfig {
    pub p: usize,
    pub q: usize,
    pub nu: usize,
    pub kernel: KernelKind,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            p: 2,
            q: 3,
            nu: 1,
            kernel: KernelKind::Triangular,
        }
    }
}

impl FitConfig {
    pub fn new(p: usize, q: usize, nu: usize, kernel: KernelKind) -> Result<Self> {
        if p > MAX_FIT_ORDER {
            return Err(Error::OrderOutOfRange {
                order: p,
                max: MAX_FIT_ORDER,
            });
        }
        if q > MAX_KERNEL_ORDER {
            return Err(Error::OrderOutOfRange {
                order: q,
                max: MAX_KERNEL_ORDER,
            });
        }
        if nu > p {
            return Err(Error::DerivativeOrder { nu, p });
        }
        if q < p {
            return Err(Error::InvalidParameter(format!(
                "inference order q = {q} below estimation order p = {p}"
            )));
        }
        Ok(FitConfig { p, q, nu, kernel })
    }

    pub fn robust(&self) -> bool {
        self.q > self.p
    }
}

/// `z_{1-α/2}` of the standard normal.
pub fn z_value(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha / 2.0)
}

/// Results at one grid point. Numeric fields are NaN when `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEstimate {
    pub x: f64,
    pub h: f64,
    pub eff_n: usize,
    pub est_p: f64,
    pub se_p: f64,
    pub est_q: f64,
    pub se_q: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub error: Option<String>,
}

impl GridEstimate {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    fn failed(x: f64, h: f64, eff_n: usize, err: &Error) -> Self {
        GridEstimate {
            x,
            h,
            eff_n,
            est_p: f64::NAN,
            se_p: f64::NAN,
            est_q: f64::NAN,
            se_q: f64::NAN,
            ci_lo: f64::NAN,
            ci_hi: f64::NAN,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceTable {
    pub rows: Vec<GridEstimate>,
    /// Simulated uniform critical value, when a band was requested.
    pub band_crit: Option<f64>,
    pub alpha: f64,
    pub config: FitConfig,
    pub uniform: bool,
    pub scale: f64,
}

impl InferenceTable {
    pub fn n_failed(&self) -> usize {
        self.rows.iter().filter(|r| !r.ok()).count()
    }
}

struct PointInfluence {
    est_p: Influence,
    est_q: Influence,
}

fn point_influences(sample: &Sample, x: f64, h: f64, cfg: &FitConfig) -> Result<PointInfluence> {
    let tp = Target::new(x, h, cfg.p, cfg.nu, cfg.kernel);
    let est_p = influence(sample, &tp)?;
    let est_q = if cfg.q == cfg.p {
        est_p.clone()
    } else {
        influence(sample, &Target::new(x, h, cfg.q, cfg.nu, cfg.kernel))?
    };
    Ok(PointInfluence { est_p, est_q })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

fn estimate_grid(sample: &Sample, bw: &BandwidthResult, cfg: &FitConfig) -> Vec<Result<PointInfluence>> {
    bw.grid
        .points()
        .par_iter()
        .zip(bw.h.par_iter())
        .map(|(&x, &h)| point_influences(sample, x, h, cfg))
        .collect()
}

fn build_row(x: f64, h: f64, eff_n: usize, pi: &PointInfluence, crit: f64) -> GridEstimate {
    let se_q = pi.est_q.fit.se.unwrap_or(f64::NAN);
    let est_q = pi.est_q.fit.est;
    GridEstimate {
        x,
        h,
        eff_n,
        est_p: pi.est_p.fit.est,
        se_p: pi.est_p.fit.se.unwrap_or(f64::NAN),
        est_q,
        se_q,
        ci_lo: est_q - crit * se_q,
        ci_hi: est_q + crit * se_q,
        error: None,
    }
}

/// Pointwise robust bias-corrected intervals `est_q ± z_{1-α/2} se_q`.
/// Points whose fit fails are flagged; fails only if every point does.
pub fn rbc_pointwise(sample: &Sample, bw: &BandwidthResult, cfg: &FitConfig, alpha: f64) -> Result<InferenceTable> {
    check_alpha(alpha)?;
    let z = z_value(alpha);
    let fits = estimate_grid(sample, bw, cfg);
    let rows = assemble(bw, &fits, z)?;
    Ok(InferenceTable {
        rows,
        band_crit: None,
        alpha,
        config: *cfg,
        uniform: false,
        scale: 1.0,
    })
}

fn assemble(bw: &BandwidthResult, fits: &[Result<PointInfluence>], crit: f64) -> Result<Vec<GridEstimate>> {
    let rows: Vec<GridEstimate> = fits
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let (x, h, eff_n) = (bw.grid.points()[i], bw.h[i], bw.eff_n[i]);
            match f {
                Ok(pi) => build_row(x, h, eff_n, pi, crit),
                Err(e) => GridEstimate::failed(x, h, eff_n, e),
            }
        })
        .collect();
    if rows.iter().all(|r| !r.ok()) {
        return Err(Error::AllPointsFailed);
    }
    Ok(rows)
}

/// Uniform band `est_q ± c se_q` over the grid, with `c` the empirical
/// `1-α` quantile of `max_g |t*_g|` across `n_sim` multiplier draws.
/// Failed points are excluded from the supremum and flagged.
pub fn uniform_band(
    sample: &Sample,
    bw: &BandwidthResult,
    cfg: &FitConfig,
    alpha: f64,
    n_sim: usize,
    seed: u64,
) -> Result<InferenceTable> {
    check_alpha(alpha)?;
    if n_sim < 100 {
        return Err(Error::InvalidParameter(format!(
            "at least 100 simulations are required, got {n_sim}"
        )));
    }
    let fits = estimate_grid(sample, bw, cfg);
    let good: Vec<&PointInfluence> = fits.iter().filter_map(|f| f.as_ref().ok()).collect();
    if good.is_empty() {
        return Err(Error::AllPointsFailed);
    }
    let maxima = multiplier_maxima(sample, &good, n_sim, seed)?;
    let crit = critical_value(&maxima, alpha);
    let rows = assemble(bw, &fits, crit)?;
    Ok(InferenceTable {
        rows,
        band_crit: Some(crit),
        alpha,
        config: *cfg,
        uniform: true,
        scale: 1.0,
    })
}

fn multiplier_maxima(sample: &Sample, fits: &[&PointInfluence], n_sim: usize, seed: u64) -> Result<Vec<f64>> {
    let n = sample.n() as f64;
    let w = sample.design_rows().w;
    let rows = w.len();
    let g = fits.len();
    // loadings[r * g + j] = sqrt(W_r) ψ_j(r) / (n se_j)
    let mut loadings = vec![0.0; rows * g];
    for (j, pi) in fits.iter().enumerate() {
        let se = pi.est_q.fit.se.unwrap_or(0.0);
        if se.is_nan() || se <= 0.0 {
            return Err(Error::ZeroStandardError { x: pi.est_q.fit.x });
        }
        for r in 0..rows {
            loadings[r * g + j] = w[r].sqrt() * pi.est_q.psi[r] / (n * se);
        }
    }
    let maxima = (0..n_sim)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut t = vec![0.0; g];
            for r in 0..rows {
                let xi: f64 = rng.sample(StandardNormal);
                for (tj, lj) in t.iter_mut().zip(&loadings[r * g..(r + 1) * g]) {
                    *tj += xi * lj;
                }
            }
            t.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
        })
        .collect();
    Ok(maxima)
}

/// Order statistic at index `ceil((1-α) n_sim)` (1-based).
pub fn critical_value(maxima: &[f64], alpha: f64) -> f64 {
    let mut sorted = maxima.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = ((1.0 - alpha) * sorted.len() as f64).ceil() as usize;
    sorted[k.clamp(1, sorted.len()) - 1]
}

/// Multiplies estimates, standard errors and interval bounds by `scale`.
pub fn scale_results(table: &InferenceTable, scale: f64) -> Result<InferenceTable> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    let mut out = table.clone();
    for r in &mut out.rows {
        r.est_p *= scale;
        r.se_p *= scale;
        r.est_q *= scale;
        r.se_q *= scale;
        r.ci_lo *= scale;
        r.ci_hi *= scale;
    }
    out.scale *= scale;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bwselect::BandwidthResult;
    use crate::ecdf::EvalGrid;

    fn sample() -> Sample {
        let xs: Vec<f64> = (0..400)
            .map(|i| ((i * 7919) % 400) as f64 / 100.0 + (i as f64 * 0.1).sin() * 0.3)
            .collect();
        Sample::new(&xs, None).unwrap()
    }

    #[test]
    fn z_for_five_percent() {
        assert!((z_value(0.05) - 1.959964).abs() < 1e-6);
    }

    #[test]
    fn pointwise_lengths_and_conventional_centring() {
        let s = sample();
        let grid = EvalGrid::new(vec![1.0, 2.0, 3.0]).unwrap();
        let bw = BandwidthResult::user(&s, &grid, &[0.8]).unwrap();
        let t = rbc_pointwise(&s, &bw, &FitConfig::default(), 0.05).unwrap();
        let z = z_value(0.05);
        for r in &t.rows {
            assert!(((r.ci_hi - r.ci_lo) - 2.0 * z * r.se_q).abs() < 1e-12);
            assert!(r.ci_lo <= r.ci_hi);
            assert_ne!(r.est_p, r.est_q);
        }
        let conv = FitConfig::new(2, 2, 1, KernelKind::Triangular).unwrap();
        let t = rbc_pointwise(&s, &bw, &conv, 0.05).unwrap();
        for r in &t.rows {
            assert_eq!(r.est_p, r.est_q);
            assert!(((r.ci_lo + r.ci_hi) / 2.0 - r.est_p).abs() < 1e-12);
        }
    }

    #[test]
    fn band_is_deterministic_and_monotone_in_alpha() {
        let s = sample();
        let grid = EvalGrid::new(vec![0.5, 1.5, 2.5, 3.5]).unwrap();
        let bw = BandwidthResult::user(&s, &grid, &[0.8]).unwrap();
        let cfg = FitConfig::default();
        let a = uniform_band(&s, &bw, &cfg, 0.05, 500, 7).unwrap();
        let b = uniform_band(&s, &bw, &cfg, 0.05, 500, 7).unwrap();
        assert_eq!(a.band_crit.unwrap().to_bits(), b.band_crit.unwrap().to_bits());
        let c01 = uniform_band(&s, &bw, &cfg, 0.01, 500, 7).unwrap().band_crit.unwrap();
        let c10 = uniform_band(&s, &bw, &cfg, 0.10, 500, 7).unwrap().band_crit.unwrap();
        let c05 = a.band_crit.unwrap();
        assert!(c01 >= c05 && c05 >= c10);
        for r in &a.rows {
            assert!(((r.ci_hi - r.ci_lo) - 2.0 * c05 * r.se_q).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_doubles_lengths() {
        let s = sample();
        let grid = EvalGrid::new(vec![1.0, 2.0]).unwrap();
        let bw = BandwidthResult::user(&s, &grid, &[0.8]).unwrap();
        let t = rbc_pointwise(&s, &bw, &FitConfig::default(), 0.05).unwrap();
        assert_eq!(scale_results(&t, 1.0).unwrap(), t);
        let d = scale_results(&t, 2.0).unwrap();
        for (a, b) in t.rows.iter().zip(&d.rows) {
            assert_eq!(2.0 * (a.ci_hi - a.ci_lo), b.ci_hi - b.ci_lo);
            assert_eq!(a.h, b.h);
            assert_eq!(a.eff_n, b.eff_n);
        }
        assert!(scale_results(&t, 0.0).is_err());
    }

    #[test]
    fn failed_points_are_flagged() {
        let s = sample();
        let grid = EvalGrid::new(vec![2.0, 50.0]).unwrap();
        let bw = BandwidthResult::user(&s, &grid, &[0.8]).unwrap();
        let t = rbc_pointwise(&s, &bw, &FitConfig::default(), 0.05).unwrap();
        assert!(t.rows[0].ok());
        assert!(!t.rows[1].ok());
        assert_eq!(t.n_failed(), 1);
        let band = uniform_band(&s, &bw, &FitConfig::default(), 0.05, 200, 1).unwrap();
        assert!(band.rows[0].ok() && !band.rows[1].ok());

        let grid = EvalGrid::new(vec![50.0]).unwrap();
        let bw = BandwidthResult::user(&s, &grid, &[0.8]).unwrap();
        assert_eq!(
            rbc_pointwise(&s, &bw, &FitConfig::default(), 0.05).unwrap_err(),
            Error::AllPointsFailed
        );
    }

    #[test]
    fn config_validation() {
        assert!(FitConfig::new(2, 1, 1, KernelKind::Uniform).is_err());
        assert!(FitConfig::new(1, 2, 2, KernelKind::Uniform).is_err());
        assert!(FitConfig::new(8, 9, 1, KernelKind::Uniform).is_err());
        assert!(FitConfig::new(0, 1, 0, KernelKind::Uniform).is_ok());
    }
}
