//! Bandwidth selection: normal-reference rules of thumb (pointwise and
//! integrated) and direct plug-in selectors that minimize an estimated
//! (integrated) mean squared error.
//!
//! The plug-in pipeline follows three steps:
//!
//! 1. integrated rule-of-thumb pilots for the `(p+1)`-th and `(p+2)`-th
//!    derivatives (fits of order `p+2` and `p+3`) and for the density with a
//!    local quadratic (`ĥ_c`);
//! 2. pilot derivative estimates, plus the variance and the bias constants of
//!    the order-`p` fit evaluated at `ĥ_c`;
//! 3. a one-dimensional search over `log h` in `[ĥ_c/50, 50 ĥ_c]`, capped
//!    above at the sample range, for the first local minimum of the
//!    estimated MSE.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, Normal};

use crate::ecdf::{EvalGrid, Sample};
use crate::error::{Error, Result};
use crate::kernel::{cached_constants, KernelKind};
use crate::lpfit::{bias_from_system, design_system, fit_point, influence, Target};
use crate::optimize::first_local_min;

/// Relative floor applied to normal-reference derivatives, in units of
/// `σ̂^{-k}`.
pub const DERIVATIVE_FLOOR: f64 = 0.01;
/// Search bracket half-width around the pilot bandwidth (multiplicative).
pub const SEARCH_SPAN: f64 = 50.0;
/// Tolerance of the bandwidth search on the log scale.
pub const SEARCH_TOL: f64 = 1e-6;
const SCAN_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BwMethod {
    MseDpi,
    ImseDpi,
    MseRot,
    ImseRot,
    /// User-supplied bandwidth: one value for the whole grid or one per point.
    User(Vec<f64>),
}

impl BwMethod {
    pub fn label(&self) -> &'static str {
        match self {
            BwMethod::MseDpi => "mse-dpi",
            BwMethod::ImseDpi => "imse-dpi",
            BwMethod::MseRot => "mse-rot",
            BwMethod::ImseRot => "imse-rot",
            BwMethod::User(_) => "user provided",
        }
    }

    pub fn is_integrated(&self) -> bool {
        matches!(self, BwMethod::ImseDpi | BwMethod::ImseRot)
    }
}

impl fmt::Display for BwMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BwMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse-dpi" => Ok(BwMethod::MseDpi),
            "imse-dpi" => Ok(BwMethod::ImseDpi),
            "mse-rot" => Ok(BwMethod::MseRot),
            "imse-rot" => Ok(BwMethod::ImseRot),
            other => Err(Error::InvalidParameter(format!("unknown bandwidth selector '{other}'"))),
        }
    }
}

/// Minimum local sample size enforcement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularizeOpts {
    pub enabled: bool,
    pub n_local_min: usize,
    pub n_unique_min: usize,
}

impl RegularizeOpts {
    /// Defaults for an order-`p` fit: at least `20 + p + 1` observations and
    /// distinct values in every window.
    pub fn for_order(p: usize) -> Self {
        RegularizeOpts {
            enabled: true,
            n_local_min: 20 + p + 1,
            n_unique_min: 20 + p + 1,
        }
    }

    pub fn disabled() -> Self {
        RegularizeOpts {
            enabled: false,
            n_local_min: 0,
            n_unique_min: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularized {
    pub h: f64,
    pub regularized: bool,
    /// The sample is smaller than the minimum; `h` covers every observation.
    pub whole_support: bool,
}

/// Enlarges `h` until `[x - h, x + h]` holds the minimum number of
/// observations and distinct values. Monotone (`h' >= h`) and idempotent.
pub fn regularize_bandwidth(sample: &Sample, x: f64, h: f64, opts: &RegularizeOpts) -> Result<Regularized> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidBandwidth(h));
    }
    let mut out = Regularized {
        h,
        regularized: false,
        whole_support: false,
    };
    if !opts.enabled {
        return Ok(out);
    }
    let whole = (x - sample.min()).abs().max((sample.max() - x).abs());
    let mut widen = |needed: bool, dist: Option<f64>| {
        if !needed {
            return;
        }
        let d = match dist {
            Some(d) => d,
            None => {
                out.whole_support = true;
                whole
            }
        };
        // nudge past rounding so the k-th point lands inside the closed window
        let d = d * (1.0 + 8.0 * f64::EPSILON) + f64::MIN_POSITIVE;
        if d > out.h {
            out.h = d;
            out.regularized = true;
        }
    };
    widen(
        sample.effective_n(x, h) < opts.n_local_min,
        sample.kth_nearest_distance(x, opts.n_local_min),
    );
    widen(
        sample.effective_n_unique(x, h) < opts.n_unique_min,
        sample.kth_nearest_unique_distance(x, opts.n_unique_min),
    );
    if out.whole_support {
        log::warn!("sample too small for the local minimum at x = {x}; bandwidth spans the support");
    }
    Ok(out)
}

/// `F^{(k)}(x)` for a normal distribution, `k >= 1`.
pub fn normal_cdf_derivative(k: usize, x: f64, mean: f64, sd: f64) -> f64 {
    debug_assert!(k >= 1);
    let z = (x - mean) / sd;
    let phi = Normal::standard().pdf(z);
    // He_{k-1}(z) by the probabilists' Hermite recurrence
    let m = k - 1;
    let (mut he_prev, mut he) = (1.0, z);
    let he_m = if m == 0 {
        1.0
    } else {
        for i in 1..m {
            let next = z * he - i as f64 * he_prev;
            he_prev = he;
            he = next;
        }
        he
    };
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * he_m * phi / sd.powi(k as i32)
}

/// Bandwidth minimizing the (summed) MSE at `points` when the distribution
/// is normal with the given moments and sample size `n`.
pub fn normal_reference_bandwidth(
    n: f64,
    mean: f64,
    sd: f64,
    points: &[f64],
    p: usize,
    nu: usize,
    kernel: KernelKind,
) -> Result<f64> {
    if !sd.is_finite() || sd <= 0.0 {
        return Err(Error::DegenerateSample);
    }
    if nu > p {
        return Err(Error::DerivativeOrder { nu, p });
    }
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty evaluation grid".into()));
    }
    let consts = cached_constants(kernel, p)?;
    let var_const = consts.variance_constant(nu);
    let (b1, b2) = consts.bias_constants(nu);
    let odd = (p - nu) % 2 == 1;
    let (k, bias_const, power, rate) = if odd {
        (p + 1, b1, 2 * p + 1, 2 * (p + 1 - nu))
    } else {
        (p + 2, b2, 2 * p + 3, 2 * (p + 2 - nu))
    };
    let floor = DERIVATIVE_FLOOR * sd.powi(-(k as i32));
    let mut v_sum = 0.0;
    let mut b_sum = 0.0;
    for &x in points {
        let dens = normal_cdf_derivative(1, x, mean, sd);
        v_sum += dens * var_const;
        let deriv = normal_cdf_derivative(k, x, mean, sd).abs().max(floor);
        b_sum += (deriv * bias_const).powi(2);
    }
    let ratio = (2.0 * nu as f64 - 1.0) * v_sum / (rate as f64 * n * b_sum);
    if !ratio.is_finite() || ratio <= 0.0 {
        return Err(Error::NonFinite(format!(
            "rule-of-thumb bandwidth ratio {ratio} (p = {p}, nu = {nu})"
        )));
    }
    Ok(ratio.powf(1.0 / power as f64))
}

/// Pointwise rule-of-thumb bandwidth under a fitted normal reference model.
pub fn rot_bandwidth(sample: &Sample, x: f64, p: usize, nu: usize, kernel: KernelKind) -> Result<f64> {
    let (mean, sd) = sample.mean_sd();
    normal_reference_bandwidth(sample.n() as f64, mean, sd, &[x], p, nu, kernel)
}

/// Integrated rule-of-thumb bandwidth: minimizes the normal-reference MSE
/// summed over `grid`.
pub fn irot_bandwidth(sample: &Sample, grid: &[f64], p: usize, nu: usize, kernel: KernelKind) -> Result<f64> {
    let (mean, sd) = sample.mean_sd();
    normal_reference_bandwidth(sample.n() as f64, mean, sd, grid, p, nu, kernel)
}

/// Pilot bandwidths shared by every evaluation point of a plug-in selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pilots {
    /// For `F̂^{(p+1)}` from an order-`p+2` fit.
    pub h_deriv1: f64,
    /// For `F̂^{(p+2)}` from an order-`p+3` fit.
    pub h_deriv2: f64,
    /// For the variance and bias constants (density, local quadratic).
    pub h_const: f64,
}

impl Pilots {
    /// Integrated rule-of-thumb pilots, integrated against the empirical
    /// distribution of the sample.
    pub fn new(sample: &Sample, p: usize, kernel: KernelKind) -> Result<Self> {
        let grid = sample.x();
        Ok(Pilots {
            h_deriv1: irot_bandwidth(sample, grid, p + 2, p + 1, kernel)?,
            h_deriv2: irot_bandwidth(sample, grid, p + 3, p + 2, kernel)?,
            h_const: irot_bandwidth(sample, grid, 2, 1, kernel)?,
        })
    }
}

/// Plug-in ingredients of the MSE at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlugIn {
    pub x: f64,
    /// Pilot bandwidth at which the variance was computed.
    pub h_const: f64,
    /// Estimated variance of the order-`p` estimator at `h_const`.
    pub var_const: f64,
    /// `h`-free part of the variance (nonzero only for the CDF, `ν = 0`).
    pub var_floor: f64,
    pub b1: f64,
    pub b2: f64,
    /// Pilot estimate of `F^{(p+1)}(x)`.
    pub deriv1: f64,
    /// Pilot estimate of `F^{(p+2)}(x)`.
    pub deriv2: f64,
    pub p: usize,
    pub nu: usize,
}

impl PlugIn {
    pub fn estimate(sample: &Sample, pilots: &Pilots, x: f64, p: usize, nu: usize, kernel: KernelKind) -> Result<Self> {
        if nu > p {
            return Err(Error::DerivativeOrder { nu, p });
        }
        let pilot = |h: f64, order: usize| -> Result<f64> {
            Ok(regularize_bandwidth(sample, x, h, &RegularizeOpts::for_order(order))?.h)
        };
        let h1 = pilot(pilots.h_deriv1, p + 2)?;
        let h2 = pilot(pilots.h_deriv2, p + 3)?;
        let hc = pilot(pilots.h_const, p)?;
        let deriv1 = fit_point(sample, &Target::new(x, h1, p + 2, p + 1, kernel))?.est;
        let deriv2 = fit_point(sample, &Target::new(x, h2, p + 3, p + 2, kernel))?.est;
        let infl = influence(sample, &Target::new(x, hc, p, nu, kernel))?;
        let se = infl.fit.se.unwrap_or(0.0);
        let sys = design_system(sample, x, hc, p, kernel)?;
        let (b1, b2) = bias_from_system(&sys, nu);
        let var_floor = if nu == 0 {
            let f = sample.ecdf_at(x);
            f * (1.0 - f) / sample.n() as f64
        } else {
            0.0
        };
        let out = PlugIn {
            x,
            h_const: hc,
            var_const: se * se,
            var_floor,
            b1,
            b2,
            deriv1,
            deriv2,
            p,
            nu,
        };
        if [out.var_const, b1, b2, deriv1, deriv2].iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::NonFinite(format!("plug-in constants at x = {x}")))
        }
    }

    /// Estimated variance at bandwidth `h`, extrapolated from the pilot.
    pub fn variance(&self, h: f64) -> f64 {
        if self.nu == 0 {
            self.var_floor + (self.var_const - self.var_floor) * (h / self.h_const)
        } else {
            self.var_const * (self.h_const / h).powi(2 * self.nu as i32 - 1)
        }
    }

    pub fn bias(&self, h: f64) -> f64 {
        h.powi((self.p + 1 - self.nu) as i32) * (self.deriv1 * self.b1 + h * self.deriv2 * self.b2)
    }

    pub fn mse(&self, h: f64) -> f64 {
        self.variance(h) + self.bias(h).powi(2)
    }
}

/// Minimizes `Σ MSE_g(h)` over `log h` in `[h_c/50, min(50 h_c, h_max)]`.
///
/// Returns the smallest-`h` local minimum. The two estimated bias terms can
/// cancel at some large `h`, producing a spurious deeper minimum where the
/// bias expansion no longer applies. Where the leading bias constant
/// vanishes the estimated MSE keeps falling in `h`; `h_max` (the sample
/// range in the selectors) keeps the answer on the scale of the data.
pub fn minimize_mse(points: &[PlugIn], h_c: f64, h_max: f64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::AllPointsFailed);
    }
    let objective = |log_h: f64| {
        let h = log_h.exp();
        let v: f64 = points.iter().map(|pt| pt.mse(h)).sum();
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let lo = (h_c / SEARCH_SPAN).ln();
    let hi = (h_c * SEARCH_SPAN).min(h_max).ln().max(lo);
    let (log_h, val) = first_local_min(objective, lo, hi, SCAN_POINTS, SEARCH_TOL);
    if !val.is_finite() {
        return Err(Error::NonFinite("plug-in MSE objective".into()));
    }
    Ok(log_h.exp())
}

/// Pointwise MSE-optimal direct plug-in bandwidth.
pub fn mse_dpi(sample: &Sample, x: f64, p: usize, nu: usize, kernel: KernelKind) -> Result<f64> {
    let pilots = Pilots::new(sample, p, kernel)?;
    mse_dpi_with(sample, &pilots, x, p, nu, kernel)
}

fn mse_dpi_with(sample: &Sample, pilots: &Pilots, x: f64, p: usize, nu: usize, kernel: KernelKind) -> Result<f64> {
    let plug = PlugIn::estimate(sample, pilots, x, p, nu, kernel)?;
    minimize_mse(&[plug], pilots.h_const, sample.max() - sample.min())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImseDpi {
    pub h: f64,
    /// Grid indices whose pilot fits failed and were left out.
    pub dropped: Vec<usize>,
}

/// IMSE-optimal direct plug-in bandwidth over `grid`, uniform weighting.
pub fn imse_dpi(sample: &Sample, grid: &[f64], p: usize, nu: usize, kernel: KernelKind) -> Result<ImseDpi> {
    let pilots = Pilots::new(sample, p, kernel)?;
    let results: Vec<Result<PlugIn>> = grid
        .par_iter()
        .map(|&x| PlugIn::estimate(sample, &pilots, x, p, nu, kernel))
        .collect();
    let mut points = Vec::with_capacity(grid.len());
    let mut dropped = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(pt) => points.push(pt),
            Err(e) => {
                log::warn!("imse-dpi: dropping grid point {} ({e})", grid[i]);
                dropped.push(i);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::AllPointsFailed);
    }
    let h = minimize_mse(&points, pilots.h_const, sample.max() - sample.min())?;
    Ok(ImseDpi { h, dropped })
}

/// Options for [`select_bandwidths`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BwConfig {
    pub p: usize,
    pub nu: usize,
    pub kernel: KernelKind,
    pub regularize: RegularizeOpts,
}

impl BwConfig {
    pub fn new(p: usize, nu: usize, kernel: KernelKind) -> Self {
        BwConfig {
            p,
            nu,
            kernel,
            regularize: RegularizeOpts::for_order(p),
        }
    }
}

/// Bandwidths selected over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthResult {
    pub grid: EvalGrid,
    pub h: Vec<f64>,
    pub method: BwMethod,
    pub regularized: Vec<bool>,
    /// Points where the plug-in failed and the rule of thumb was used.
    pub fallback: Vec<bool>,
    pub eff_n: Vec<usize>,
}

impl BandwidthResult {
    /// Wraps user bandwidths (scalar or one per point) without selection.
    pub fn user(sample: &Sample, grid: &EvalGrid, h: &[f64]) -> Result<Self> {
        let hs: Vec<f64> = match h.len() {
            1 => vec![h[0]; grid.len()],
            m if m == grid.len() => h.to_vec(),
            m => {
                return Err(Error::InvalidParameter(format!(
                    "{m} bandwidths given for {} grid points",
                    grid.len()
                )))
            }
        };
        if let Some(bad) = hs.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::InvalidBandwidth(*bad));
        }
        let eff_n = grid
            .points()
            .iter()
            .zip(&hs)
            .map(|(&x, &hh)| sample.effective_n(x, hh))
            .collect();
        Ok(BandwidthResult {
            grid: grid.clone(),
            method: BwMethod::User(h.to_vec()),
            regularized: vec![false; hs.len()],
            fallback: vec![false; hs.len()],
            h: hs,
            eff_n,
        })
    }
}

/// Runs a selector over `grid` and applies minimum-sample regularization.
/// User bandwidths are returned as given.
pub fn select_bandwidths(
    sample: &Sample,
    grid: &EvalGrid,
    method: &BwMethod,
    cfg: &BwConfig,
) -> Result<BandwidthResult> {
    let (p, nu, kernel) = (cfg.p, cfg.nu, cfg.kernel);
    let pts = grid.points();
    let (raw, fallback): (Vec<f64>, Vec<bool>) = match method {
        BwMethod::User(h) => return BandwidthResult::user(sample, grid, h),
        BwMethod::MseRot => (
            pts.iter()
                .map(|&x| rot_bandwidth(sample, x, p, nu, kernel))
                .collect::<Result<_>>()?,
            vec![false; pts.len()],
        ),
        BwMethod::ImseRot => (
            vec![irot_bandwidth(sample, pts, p, nu, kernel)?; pts.len()],
            vec![false; pts.len()],
        ),
        BwMethod::ImseDpi => (
            vec![imse_dpi(sample, pts, p, nu, kernel)?.h; pts.len()],
            vec![false; pts.len()],
        ),
        BwMethod::MseDpi => {
            let pilots = Pilots::new(sample, p, kernel)?;
            let per: Vec<Result<(f64, bool)>> = pts
                .par_iter()
                .map(|&x| match mse_dpi_with(sample, &pilots, x, p, nu, kernel) {
                    Ok(h) => Ok((h, false)),
                    Err(e) => {
                        log::warn!("mse-dpi failed at x = {x} ({e}); using mse-rot");
                        Ok((rot_bandwidth(sample, x, p, nu, kernel)?, true))
                    }
                })
                .collect();
            per.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip()
        }
    };

    let mut h = Vec::with_capacity(pts.len());
    let mut regularized = Vec::with_capacity(pts.len());
    if method.is_integrated() {
        // one common bandwidth satisfying the minimum at every grid point
        let mut common = raw[0];
        for &x in pts {
            common = common.max(regularize_bandwidth(sample, x, raw[0], &cfg.regularize)?.h);
        }
        h.resize(pts.len(), common);
        regularized.resize(pts.len(), common > raw[0]);
    } else {
        for (&x, &hr) in pts.iter().zip(&raw) {
            let r = regularize_bandwidth(sample, x, hr, &cfg.regularize)?;
            h.push(r.h);
            regularized.push(r.regularized);
        }
    }
    let eff_n = pts.iter().zip(&h).map(|(&x, &hh)| sample.effective_n(x, hh)).collect();
    Ok(BandwidthResult {
        grid: grid.clone(),
        h,
        method: method.clone(),
        regularized,
        fallback,
        eff_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normalish(n: usize, shift: f64, scale: f64) -> Sample {
        // deterministic quasi-normal sample via the inverse CDF at midpoints
        let std = Normal::standard();
        use statrs::distribution::ContinuousCDF;
        let xs: Vec<f64> = (0..n)
            .map(|i| shift + scale * std.inverse_cdf((i as f64 + 0.5) / n as f64))
            .collect();
        Sample::new(&xs, None).unwrap()
    }

    #[test]
    fn normal_derivatives_match_finite_differences() {
        let (m, s) = (0.7, 1.3);
        let x = 1.1;
        let eps = 1e-4;
        for k in 1..=5 {
            let fd = (normal_cdf_derivative(k, x + eps, m, s) - normal_cdf_derivative(k, x - eps, m, s)) / (2.0 * eps);
            let exact = normal_cdf_derivative(k + 1, x, m, s);
            assert!((fd - exact).abs() < 1e-6, "k={k}: {fd} vs {exact}");
        }
        let dens = Normal::new(m, s).unwrap().pdf(x);
        assert!((normal_cdf_derivative(1, x, m, s) - dens).abs() < 1e-15);
    }

    #[test]
    fn rot_power_law_in_n() {
        let small = normalish(500, 0.0, 1.0);
        let large = normalish(1000, 0.0, 1.0);
        // same fitted moments up to the quasi-sample; compare with closed form
        let (m1, s1) = small.mean_sd();
        let a = normal_reference_bandwidth(500.0, m1, s1, &[0.3], 2, 1, KernelKind::Triangular).unwrap();
        let b = normal_reference_bandwidth(1000.0, m1, s1, &[0.3], 2, 1, KernelKind::Triangular).unwrap();
        assert!((b / a - 2f64.powf(-1.0 / 5.0)).abs() < 1e-12);
        let a = normal_reference_bandwidth(500.0, m1, s1, &[0.3], 2, 2, KernelKind::Triangular).unwrap();
        let b = normal_reference_bandwidth(1000.0, m1, s1, &[0.3], 2, 2, KernelKind::Triangular).unwrap();
        assert!((b / a - 2f64.powf(-1.0 / 7.0)).abs() < 1e-12);
        assert!(rot_bandwidth(&large, 0.3, 2, 1, KernelKind::Triangular).unwrap() > 0.0);
    }

    #[test]
    fn rot_scale_equivariant() {
        let base = normalish(400, 1.0, 1.0);
        let lambda = 3.7;
        let scaled_x: Vec<f64> = base.x().iter().map(|x| x * lambda).collect();
        let scaled = Sample::new(&scaled_x, None).unwrap();
        for (p, nu) in [(1, 1), (2, 1), (2, 2), (3, 1), (0, 0), (1, 0)] {
            let h = rot_bandwidth(&base, 0.4, p, nu, KernelKind::Epanechnikov).unwrap();
            let hs = rot_bandwidth(&scaled, 0.4 * lambda, p, nu, KernelKind::Epanechnikov).unwrap();
            assert!((hs / (lambda * h) - 1.0).abs() < 1e-9, "p={p} nu={nu}");
        }
    }

    #[test]
    fn irot_single_point_and_repeats() {
        let s = normalish(300, 0.0, 2.0);
        let rot = rot_bandwidth(&s, 0.5, 2, 1, KernelKind::Triangular).unwrap();
        let irot = irot_bandwidth(&s, &[0.5], 2, 1, KernelKind::Triangular).unwrap();
        assert_eq!(rot, irot);
        let grid = [-1.0, 0.2, 1.5];
        let a = irot_bandwidth(&s, &grid, 2, 1, KernelKind::Triangular).unwrap();
        let rep: Vec<f64> = grid.iter().flat_map(|&g| [g, g, g]).collect();
        let b = irot_bandwidth(&s, &rep, 2, 1, KernelKind::Triangular).unwrap();
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn irot_reflection_symmetry() {
        let s = normalish(500, 2.0, 1.0);
        let (mu, _) = s.mean_sd();
        let grid = [1.0, 1.7, 2.4, 3.3];
        let reflected: Vec<f64> = grid.iter().map(|g| 2.0 * mu - g).collect();
        let a = irot_bandwidth(&s, &grid, 2, 1, KernelKind::Triangular).unwrap();
        let b = irot_bandwidth(&s, &reflected, 2, 1, KernelKind::Triangular).unwrap();
        assert!((a / b - 1.0).abs() < 1e-10);
    }

    #[test]
    fn regularization_examples() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let s = Sample::new(&xs, None).unwrap();
        let opts = RegularizeOpts::for_order(2);
        assert_eq!(opts.n_local_min, 23);
        let r = regularize_bandwidth(&s, 0.5, 0.25, &opts).unwrap();
        assert_eq!(r.h, 0.25);
        assert!(!r.regularized);

        // h covering ~10 points is widened to the 23rd nearest
        let r = regularize_bandwidth(&s, 0.5, 0.0045, &opts).unwrap();
        assert!(r.regularized);
        let d23 = s.kth_nearest_distance(0.5, 23).unwrap();
        assert!((r.h - d23).abs() < 1e-12);
        assert!(s.effective_n(0.5, r.h) >= 23);
        let again = regularize_bandwidth(&s, 0.5, r.h, &opts).unwrap();
        assert_eq!(again.h, r.h);
        assert!(!again.regularized);

        let off = regularize_bandwidth(&s, 0.5, 0.0045, &RegularizeOpts::disabled()).unwrap();
        assert_eq!(off.h, 0.0045);
    }

    #[test]
    fn regularization_small_sample_spans_support() {
        let s = Sample::new(&[0.0, 1.0, 2.0, 5.0], None).unwrap();
        let r = regularize_bandwidth(&s, 1.5, 0.1, &RegularizeOpts::for_order(2)).unwrap();
        assert!(r.whole_support);
        assert!(r.h >= 3.5);
        assert_eq!(s.effective_n(1.5, r.h), 4);
    }

    #[test]
    fn plug_in_stays_within_sample_range() {
        // inflection points of the normal sit at ±1: the leading bias term vanishes there
        let s = normalish(800, 0.0, 1.0);
        let range = s.max() - s.min();
        for x in [-1.0, -0.98, 0.0, 1.0, 1.02] {
            let h = mse_dpi(&s, x, 2, 1, KernelKind::Triangular).unwrap();
            assert!(h > 0.0 && h <= range, "h = {h} at {x}");
        }
    }

    #[test]
    fn imse_single_point_equals_mse() {
        let s = normalish(800, 1.0, 1.0);
        let a = mse_dpi(&s, 1.2, 2, 1, KernelKind::Triangular).unwrap();
        let b = imse_dpi(&s, &[1.2], 2, 1, KernelKind::Triangular).unwrap();
        assert_eq!(a, b.h);
        assert!(b.dropped.is_empty());
    }

    #[test]
    fn user_bandwidth_validation() {
        let s = normalish(50, 0.0, 1.0);
        let grid = EvalGrid::new(vec![-0.5, 0.0, 0.5]).unwrap();
        assert!(BandwidthResult::user(&s, &grid, &[0.5, 0.5]).is_err());
        assert!(BandwidthResult::user(&s, &grid, &[-1.0]).is_err());
        let r = BandwidthResult::user(&s, &grid, &[0.7]).unwrap();
        assert_eq!(r.h, vec![0.7; 3]);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("mse-dpi".parse::<BwMethod>().unwrap(), BwMethod::MseDpi);
        assert_eq!("IMSE-ROT".parse::<BwMethod>().unwrap(), BwMethod::ImseRot);
        assert!("cv".parse::<BwMethod>().is_err());
    }
}
