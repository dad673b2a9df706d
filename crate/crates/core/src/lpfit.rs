//! Weighted least-squares local polynomial fits of the empirical CDF.
//!
//! Everything runs in the scaled basis `r_p(u)`, `u = (X_j - x)/h`; the
//! coefficient `c_k` maps back to the unscaled `β_k` through `β_k = c_k / h^k`.
//! The dependent variable is the empirical CDF itself, so the variance comes
//! from the influence of each observation on every `F̂(X_j)` rather than from
//! regression residuals.

use nalgebra::{ColPivQR, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecdf::{window_of, DesignRows, Sample};
use crate::error::{Error, Result};
use crate::kernel::{factorial, KernelKind, MAX_KERNEL_ORDER};

/// Condition estimate above which a local system is declared singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// A single local fit request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub x: f64,
    pub h: f64,
    pub p: usize,
    pub nu: usize,
    pub kernel: KernelKind,
}

impl Target {
    pub fn new(x: f64, h: f64, p: usize, nu: usize, kernel: KernelKind) -> Self {
        Target { x, h, p, nu, kernel }
    }

    fn validate(&self) -> Result<()> {
        if !self.h.is_finite() || self.h <= 0.0 {
            return Err(Error::InvalidBandwidth(self.h));
        }
        if self.p > MAX_KERNEL_ORDER {
            return Err(Error::OrderOutOfRange {
                order: self.p,
                max: MAX_KERNEL_ORDER,
            });
        }
        if self.nu > self.p {
            return Err(Error::DerivativeOrder { nu: self.nu, p: self.p });
        }
        Ok(())
    }
}

/// Scaled normal equations of one local fit.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub x: f64,
    pub h: f64,
    pub p: usize,
    /// `S = (1/(nh)) Σ w_j K(u_j) r_p(u_j) r_p(u_j)'`
    pub s_matrix: DMatrix<f64>,
    /// `m_{p+1}` and `m_{p+2}`, with `m_k = (1/(nh)) Σ w_j K(u_j) r_p(u_j) u_j^k`.
    pub m_vec: [DVector<f64>; 2],
    pub rhs: DVector<f64>,
    pub c_hat: DVector<f64>,
    pub condition: f64,
    qr: ColPivQR<f64, Dyn, Dyn>,
    window: (usize, usize),
    n: f64,
}

impl LocalSystem {
    /// Fits an order-`p` polynomial in `(x_j - x0)/h` to `y` with weights
    /// `w_j K(u_j)`. `xs` must be sorted ascending.
    pub fn from_rows(
        xs: &[f64],
        ws: &[f64],
        ys: &[f64],
        x0: f64,
        h: f64,
        p: usize,
        kernel: KernelKind,
    ) -> Result<Self> {
        let n: f64 = ws.iter().sum();
        Self::build(DesignRows { x: xs, w: ws, y: ys }, n, x0, h, p, kernel)
    }

    fn build(rows: DesignRows<'_>, n: f64, x0: f64, h: f64, p: usize, kernel: KernelKind) -> Result<Self> {
        let dim = p + 1;
        let (lo, hi) = window_of(rows.x, x0, h);
        let mut moments = vec![0.0; 2 * p + 3];
        let mut rhs = DVector::zeros(dim);
        let mut support = 0usize;
        let scale = 1.0 / (n * h);
        for j in lo..hi {
            let u = (rows.x[j] - x0) / h;
            let k = rows.w[j] * kernel.eval(u) * scale;
            if k <= 0.0 {
                continue;
            }
            support += 1;
            let mut pw = k;
            for (t, m) in moments.iter_mut().enumerate() {
                *m += pw;
                if t < dim {
                    rhs[t] += pw * rows.y[j];
                }
                pw *= u;
            }
        }
        if support < dim {
            return Err(Error::SingularFit {
                x: x0,
                h,
                condition: f64::INFINITY,
            });
        }
        let s_matrix = DMatrix::from_fn(dim, dim, |a, b| moments[a + b]);
        let m_vec = [
            DVector::from_fn(dim, |a, _| moments[a + p + 1]),
            DVector::from_fn(dim, |a, _| moments[a + p + 2]),
        ];
        let qr = s_matrix.clone().col_piv_qr();
        let condition = condition_estimate(&qr);
        if condition.is_nan() || condition > CONDITION_LIMIT {
            return Err(Error::SingularFit { x: x0, h, condition });
        }
        let c_hat = qr.solve(&rhs).ok_or(Error::SingularFit { x: x0, h, condition })?;
        Ok(LocalSystem {
            x: x0,
            h,
            p,
            s_matrix,
            m_vec,
            rhs,
            c_hat,
            condition,
            qr,
            window: (lo, hi),
            n,
        })
    }

    /// Solves `S z = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.qr
            .solve(b)
            .expect("system was checked for singularity on construction")
    }

    /// `S⁻¹ e_ν`.
    pub fn inverse_column(&self, nu: usize) -> DVector<f64> {
        let mut e = DVector::zeros(self.p + 1);
        e[nu] = 1.0;
        self.solve(&e)
    }

    /// Unscaled coefficients `β_k = c_k / h^k`.
    pub fn coefficients(&self) -> Vec<f64> {
        self.c_hat
            .iter()
            .enumerate()
            .map(|(k, c)| c / self.h.powi(k as i32))
            .collect()
    }

    /// `ν! β_ν`, the order-`ν` derivative estimate.
    pub fn derivative(&self, nu: usize) -> f64 {
        factorial(nu) * self.c_hat[nu] / self.h.powi(nu as i32)
    }
}

fn condition_estimate(qr: &ColPivQR<f64, Dyn, Dyn>) -> f64 {
    let r = qr.r();
    let diag: Vec<f64> = (0..r.nrows()).map(|i| r[(i, i)].abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Builds the local system of `sample` at `x`.
pub fn design_system(sample: &Sample, x: f64, h: f64, p: usize, kernel: KernelKind) -> Result<LocalSystem> {
    Target::new(x, h, p, 0, kernel).validate()?;
    LocalSystem::build(sample.design_rows(), sample.n() as f64, x, h, p, kernel)
}

/// Estimate of `F^{(ν)}(x)` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFit {
    pub x: f64,
    pub h: f64,
    pub p: usize,
    pub nu: usize,
    pub eff_n: usize,
    pub est: f64,
    pub se: Option<f64>,
    /// Unscaled local polynomial coefficients `β̂_p(x)`.
    pub coefficients: Vec<f64>,
}

/// Point estimate only; `se` is left empty.
pub fn fit_point(sample: &Sample, target: &Target) -> Result<PointFit> {
    target.validate()?;
    let sys = design_system(sample, target.x, target.h, target.p, target.kernel)?;
    Ok(point_fit(sample, target, &sys))
}

fn point_fit(sample: &Sample, target: &Target, sys: &LocalSystem) -> PointFit {
    PointFit {
        x: target.x,
        h: target.h,
        p: target.p,
        nu: target.nu,
        eff_n: sample.effective_n(target.x, target.h),
        est: sys.derivative(target.nu),
        se: None,
        coefficients: sys.coefficients(),
    }
}

/// Influence values of one fit, one per design row.
#[derive(Debug, Clone)]
pub struct Influence {
    pub fit: PointFit,
    /// `ψ_r = ν! h^{-ν} e_ν' S⁻¹ L_r` for each design row `r`.
    pub psi: Vec<f64>,
}

/// Point estimate together with its influence representation; `fit.se` is
/// filled from the diagonal of the influence Gram matrix.
pub fn influence(sample: &Sample, target: &Target) -> Result<Influence> {
    target.validate()?;
    let rows = sample.design_rows();
    let sys = design_system(sample, target.x, target.h, target.p, target.kernel)?;
    let g = sys.inverse_column(target.nu) * (factorial(target.nu) / target.h.powi(target.nu as i32));

    // s_j = g' a_j, a_j = w_j K(u_j) r_p(u_j) / (nh)
    let (lo, hi) = sys.window;
    let scale = 1.0 / (sys.n * target.h);
    let mut contrib = vec![0.0; hi - lo];
    let mut centre = 0.0;
    for (slot, j) in contrib.iter_mut().zip(lo..hi) {
        let u = (rows.x[j] - target.x) / target.h;
        let k = rows.w[j] * target.kernel.eval(u) * scale;
        if k <= 0.0 {
            continue;
        }
        let mut pw = k;
        let mut s = 0.0;
        for gi in g.iter() {
            s += gi * pw;
            pw *= u;
        }
        *slot = s;
        centre += s * rows.y[j];
    }

    // L_i = Σ_j a_j [1(X_i <= X_j) - F̂(X_j)]; the indicator is a suffix sum
    // over the sorted rows.
    let m = rows.x.len();
    let mut psi = vec![0.0; m];
    let mut suffix = 0.0;
    for i in (0..m).rev() {
        if i >= lo && i < hi {
            suffix += contrib[i - lo];
        }
        psi[i] = suffix - centre;
    }

    let mut fit = point_fit(sample, target, &sys);
    let var = gram(rows.w, &psi, &psi, sample.n() as f64);
    fit.se = Some(var.max(0.0).sqrt());
    Ok(Influence { fit, psi })
}

fn gram(w: &[f64], a: &[f64], b: &[f64], n: f64) -> f64 {
    w.iter()
        .zip(a.iter().zip(b))
        .map(|(wi, (ai, bi))| wi * ai * bi)
        .sum::<f64>()
        / (n * n)
}

/// Point estimate with its influence-function standard error.
pub fn fit_point_with_se(sample: &Sample, target: &Target) -> Result<PointFit> {
    Ok(influence(sample, target)?.fit)
}

/// Estimated covariance of `F̂^{(ν)}` across targets.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    pub entries: DMatrix<f64>,
}

impl CovMatrix {
    pub fn se(&self) -> Vec<f64> {
        self.entries.diagonal().iter().map(|v| v.max(0.0).sqrt()).collect()
    }
}

/// Gram matrix `(1/n²) Σ_i w_i ψ_i(t) ψ_i(t')` of the influence values.
pub fn influence_covariance(sample: &Sample, targets: &[Target]) -> Result<CovMatrix> {
    let infl: Vec<Influence> = targets
        .par_iter()
        .map(|t| influence(sample, t))
        .collect::<Result<_>>()?;
    Ok(covariance_of(sample, &infl))
}

pub(crate) fn covariance_of(sample: &Sample, infl: &[Influence]) -> CovMatrix {
    let w = sample.design_rows().w;
    let n = sample.n() as f64;
    let g = infl.len();
    let mut entries = DMatrix::zeros(g, g);
    for a in 0..g {
        for b in a..g {
            let v = gram(w, &infl[a].psi, &infl[b].psi, n);
            entries[(a, b)] = v;
            entries[(b, a)] = v;
        }
    }
    CovMatrix { entries }
}

/// Pre-asymptotic bias constants
/// `B1 = ν!/(p+1)! e_ν'S⁻¹m_{p+1}` and `B2 = ν!/(p+2)! e_ν'S⁻¹m_{p+2}`.
pub fn bias_constants(sample: &Sample, target: &Target) -> Result<(f64, f64)> {
    target.validate()?;
    let sys = design_system(sample, target.x, target.h, target.p, target.kernel)?;
    Ok(bias_from_system(&sys, target.nu))
}

pub(crate) fn bias_from_system(sys: &LocalSystem, nu: usize) -> (f64, f64) {
    let g = sys.inverse_column(nu);
    let fnu = factorial(nu);
    (
        fnu / factorial(sys.p + 1) * g.dot(&sys.m_vec[0]),
        fnu / factorial(sys.p + 2) * g.dot(&sys.m_vec[1]),
    )
}

/// Robust bias-corrected estimate: the order-`q` fit at the order-`p`
/// bandwidth, with its own standard error.
pub fn rbc_estimate(
    sample: &Sample,
    x: f64,
    h_p: f64,
    p: usize,
    q: usize,
    nu: usize,
    kernel: KernelKind,
) -> Result<PointFit> {
    if q < p {
        return Err(Error::InvalidParameter(format!(
            "inference order q = {q} below estimation order p = {p}"
        )));
    }
    fit_point_with_se(sample, &Target::new(x, h_p, q, nu, kernel))
}
