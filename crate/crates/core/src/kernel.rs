//! Kernel functions on `[-1, 1]` and the interior kernel-constant matrices
//! used by the normal-reference bandwidth selectors.
//!
//! All kernels are normalized to integrate to one over their support.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest polynomial order for which kernel constants can be computed.
///
/// Fits are limited to order 7, but the plug-in pilots need constants up to
/// three orders above the fit.
pub const MAX_KERNEL_ORDER: usize = 10;

const GL_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    #[default]
    Triangular,
    Uniform,
    Epanechnikov,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [KernelKind::Triangular, KernelKind::Uniform, KernelKind::Epanechnikov];

    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        let a = u.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self {
            KernelKind::Triangular => 1.0 - a,
            KernelKind::Uniform => 0.5,
            KernelKind::Epanechnikov => 0.75 * (1.0 - u * u),
        }
    }

    /// `∫ K(u)^2 du`, the roughness of the kernel.
    pub fn roughness(self) -> f64 {
        match self {
            KernelKind::Triangular => 2.0 / 3.0,
            KernelKind::Uniform => 0.5,
            KernelKind::Epanechnikov => 0.6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Triangular => "triangular",
            KernelKind::Uniform => "uniform",
            KernelKind::Epanechnikov => "epanechnikov",
        }
    }

    /// Points inside `(-1, 1)` where the kernel is not smooth.
    fn breakpoints(self) -> &'static [f64] {
        match self {
            KernelKind::Triangular => &[0.0],
            _ => &[],
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "triangular" | "tri" => Ok(KernelKind::Triangular),
            "uniform" | "uni" => Ok(KernelKind::Uniform),
            "epanechnikov" | "epa" => Ok(KernelKind::Epanechnikov),
            other => Err(Error::InvalidParameter(format!("unknown kernel '{other}'"))),
        }
    }
}

/// Evaluates the kernel at `u`; zero outside `[-1, 1]`.
#[inline]
pub fn kernel_eval(kind: KernelKind, u: f64) -> f64 {
    kind.eval(u)
}

/// Kernel moment matrices for an order-`p` local polynomial at an interior
/// point. Every integral runs over `[-1, 1]` with `r_p(u) = (1, u, ..., u^p)`.
#[derive(Debug, Clone)]
pub struct KernelConstants {
    pub kind: KernelKind,
    pub p: usize,
    /// `∫ K(u) r_p(u) r_p(u)' du`
    pub gamma: DMatrix<f64>,
    /// `∫ K(u) r_p(u) u^{p+1} du`
    pub m_next: DVector<f64>,
    /// `∫ K(u) r_p(u) u^{p+2} du`
    pub m_next2: DVector<f64>,
    /// `∬ K(u) K(v) r_p(u) r_p(v)' min(u, v) du dv`
    pub tmat: DMatrix<f64>,
}

impl KernelConstants {
    /// `ν!² e_ν' Γ⁻¹ T Γ⁻¹ e_ν`; the interior variance constant up to the
    /// density factor.
    pub fn variance_constant(&self, nu: usize) -> f64 {
        let g = self.gamma_inv_col(nu);
        let fact = factorial(nu);
        fact * fact * g.dot(&(&self.tmat * &g))
    }

    /// Interior leading and second-order bias constants
    /// `(ν!/(p+1)! e_ν'Γ⁻¹m_{p+1}, ν!/(p+2)! e_ν'Γ⁻¹m_{p+2})`.
    pub fn bias_constants(&self, nu: usize) -> (f64, f64) {
        let g = self.gamma_inv_col(nu);
        let fnu = factorial(nu);
        (
            fnu / factorial(self.p + 1) * g.dot(&self.m_next),
            fnu / factorial(self.p + 2) * g.dot(&self.m_next2),
        )
    }

    fn gamma_inv_col(&self, nu: usize) -> DVector<f64> {
        let mut e = DVector::zeros(self.p + 1);
        e[nu] = 1.0;
        // gamma is a positive definite moment matrix
        self.gamma
            .clone()
            .cholesky()
            .expect("kernel moment matrix is positive definite")
            .solve(&e)
    }
}

/// Computes the interior kernel constants by Gauss–Legendre quadrature on
/// panels split at the kernel's kinks.
pub fn kernel_constants(kind: KernelKind, p: usize) -> Result<KernelConstants> {
    if p > MAX_KERNEL_ORDER {
        return Err(Error::OrderOutOfRange {
            order: p,
            max: MAX_KERNEL_ORDER,
        });
    }
    let dim = p + 1;
    let moment = |k: usize| integrate(kind, -1.0, 1.0, |u| kind.eval(u) * u.powi(k as i32));
    let moments: Vec<f64> = (0..=2 * p + 2).map(moment).collect();

    let gamma = DMatrix::from_fn(dim, dim, |j, k| moments[j + k]);
    let m_next = DVector::from_fn(dim, |j, _| moments[j + p + 1]);
    let m_next2 = DVector::from_fn(dim, |j, _| moments[j + p + 2]);

    // T_jk = ∫ K(u) u^j G_k(u) du with
    // G_k(u) = ∫_{-1}^{u} K(v) v^{k+1} dv + u ∫_{u}^{1} K(v) v^k dv.
    let inner = |k: usize, u: f64| {
        integrate(kind, -1.0, u, |v| kind.eval(v) * v.powi(k as i32 + 1))
            + u * integrate(kind, u, 1.0, |v| kind.eval(v) * v.powi(k as i32))
    };
    let mut tmat = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        for k in j..dim {
            let val = integrate(kind, -1.0, 1.0, |u| kind.eval(u) * u.powi(j as i32) * inner(k, u));
            tmat[(j, k)] = val;
            tmat[(k, j)] = val;
        }
    }

    Ok(KernelConstants {
        kind,
        p,
        gamma,
        m_next,
        m_next2,
        tmat,
    })
}

type ConstantsCache = Mutex<HashMap<(KernelKind, usize), Arc<KernelConstants>>>;

/// Memoized [`kernel_constants`].
pub fn cached_constants(kind: KernelKind, p: usize) -> Result<Arc<KernelConstants>> {
    static CACHE: OnceLock<ConstantsCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("kernel cache poisoned").get(&(kind, p)) {
        return Ok(Arc::clone(hit));
    }
    let fresh = Arc::new(kernel_constants(kind, p)?);
    cache
        .lock()
        .expect("kernel cache poisoned")
        .insert((kind, p), Arc::clone(&fresh));
    Ok(fresh)
}

/// Classical fixed-kernel density estimate `(1/(nh)) Σ w_i K((X_i - x)/h)`
/// with its textbook standard error `sqrt(f̂ R(K) / (nh))`. Not boundary
/// adaptive; kept as a comparison baseline.
pub fn classical_kde(sample: &crate::ecdf::Sample, x: f64, h: f64, kind: KernelKind) -> (f64, f64) {
    let n = sample.n() as f64;
    let (lo, hi) = sample.window(x, h);
    let xs = sample.x();
    let ws = sample.weights();
    let sum: f64 = (lo..hi).map(|i| ws[i] * kind.eval((xs[i] - x) / h)).sum();
    let est = sum / (n * h);
    let se = (est.max(0.0) * kind.roughness() / (n * h)).sqrt();
    (est, se)
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Integrates `f` over `[a, b]`, splitting at the kernel's breakpoints.
fn integrate<F: Fn(f64) -> f64>(kind: KernelKind, a: f64, b: f64, f: F) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut total = 0.0;
    let mut left = a;
    for &bp in kind.breakpoints() {
        if bp > left && bp < b {
            total += gauss_legendre(left, bp, &f);
            left = bp;
        }
    }
    total + gauss_legendre(left, b, &f)
}

fn gauss_legendre<F: Fn(f64) -> f64>(a: f64, b: f64, f: &F) -> f64 {
    let (nodes, weights) = gl_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights)
        .map(|(&t, &w)| w * f(mid + half * t))
        .sum::<f64>()
        * half
}

fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(GL_NODES))
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            deriv = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        if dp != 0.0 {
            deriv = dp;
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(kernel_eval(KernelKind::Triangular, 0.0), 1.0);
        assert_eq!(kernel_eval(KernelKind::Epanechnikov, 1.2), 0.0);
        assert_eq!(kernel_eval(KernelKind::Uniform, 0.3), 0.5);
    }

    #[test]
    fn kernels_integrate_to_one_and_are_symmetric() {
        for kind in KernelKind::ALL {
            let mass = integrate(kind, -1.0, 1.0, |u| kind.eval(u));
            assert!((mass - 1.0).abs() < 1e-13, "{kind}: {mass}");
            let rough = integrate(kind, -1.0, 1.0, |u| kind.eval(u).powi(2));
            assert!((rough - kind.roughness()).abs() < 1e-13);
            for i in 0..50 {
                let u = -1.5 + 0.06 * i as f64;
                assert_eq!(kind.eval(u), kind.eval(-u));
                assert!(kind.eval(u) >= 0.0);
            }
        }
    }

    #[test]
    fn legendre_rule_integrates_high_degree_polynomials() {
        let (nodes, weights) = legendre_rule(GL_NODES);
        let wsum: f64 = weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // ∫ u^126 du = 2/127
        let val: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x.powi(126)).sum();
        assert!((val - 2.0 / 127.0).abs() < 1e-14);
    }

    #[test]
    fn constant_examples() {
        let c = kernel_constants(KernelKind::Uniform, 0).unwrap();
        assert!((c.gamma[(0, 0)] - 1.0).abs() < 1e-14);

        let c = kernel_constants(KernelKind::Triangular, 1).unwrap();
        assert!((c.gamma[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(c.gamma[(0, 1)].abs() < 1e-15);

        // 0.75 ∫ (1 - u²) u² du = 0.75 (2/3 - 2/5) = 0.2
        let c = kernel_constants(KernelKind::Epanechnikov, 2).unwrap();
        assert!((c.gamma[(1, 1)] - 0.2).abs() < 1e-14);
    }

    #[test]
    fn closed_form_moments() {
        // triangular: ∫ (1-|u|) u^{2k} du = 2/((2k+1)(2k+2))
        // epanechnikov: 0.75 ∫ (1-u²) u^{2k} du = 1.5 (1/(2k+1) - 1/(2k+3))
        // uniform: 1/(2k+1)
        let c_tri = kernel_constants(KernelKind::Triangular, 5).unwrap();
        let c_epa = kernel_constants(KernelKind::Epanechnikov, 5).unwrap();
        let c_uni = kernel_constants(KernelKind::Uniform, 5).unwrap();
        for j in 0..=5 {
            for k in 0..=5 {
                let s = j + k;
                let (tri, epa, uni) = if s % 2 == 1 {
                    (0.0, 0.0, 0.0)
                } else {
                    let m = s as f64;
                    (
                        2.0 / ((m + 1.0) * (m + 2.0)),
                        1.5 * (1.0 / (m + 1.0) - 1.0 / (m + 3.0)),
                        1.0 / (m + 1.0),
                    )
                };
                assert!((c_tri.gamma[(j, k)] - tri).abs() < 1e-10);
                assert!((c_epa.gamma[(j, k)] - epa).abs() < 1e-10);
                assert!((c_uni.gamma[(j, k)] - uni).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tmat_matches_uniform_closed_form() {
        // Uniform, p = 0: ∬ 0.25 min(u, v) du dv = -1/3 (E[min] of two U(-1,1)).
        let c = kernel_constants(KernelKind::Uniform, 0).unwrap();
        assert!((c.tmat[(0, 0)] + 1.0 / 3.0).abs() < 1e-13, "{}", c.tmat[(0, 0)]);
        // Uniform, p = 1: T_11 = E[U V min(U, V)] with U, V ~ U(-1, 1) = 1/15.
        let c = kernel_constants(KernelKind::Uniform, 1).unwrap();
        assert!((c.tmat[(1, 1)] - 1.0 / 15.0).abs() < 1e-13, "{}", c.tmat[(1, 1)]);
    }

    #[test]
    fn tmat_matches_brute_force_double_integral() {
        // Independent midpoint double sum on a fine grid.
        for kind in KernelKind::ALL {
            let c = kernel_constants(kind, 2).unwrap();
            let m = 1200;
            let step = 2.0 / m as f64;
            let mut t = [[0.0; 3]; 3];
            for a in 0..m {
                let u = -1.0 + (a as f64 + 0.5) * step;
                let ku = kind.eval(u);
                for b in 0..m {
                    let v = -1.0 + (b as f64 + 0.5) * step;
                    let base = ku * kind.eval(v) * u.min(v) * step * step;
                    for (j, row) in t.iter_mut().enumerate() {
                        for (k, cell) in row.iter_mut().enumerate() {
                            *cell += base * u.powi(j as i32) * v.powi(k as i32);
                        }
                    }
                }
            }
            for (j, row) in t.iter().enumerate() {
                for (k, cell) in row.iter().enumerate() {
                    assert!((c.tmat[(j, k)] - cell).abs() < 2e-5, "{kind} {j}{k}");
                    assert_eq!(c.tmat[(j, k)], c.tmat[(k, j)]);
                }
            }
        }
    }

    #[test]
    fn variance_constant_positive_for_derivatives() {
        for kind in KernelKind::ALL {
            for p in 1..=7 {
                let c = kernel_constants(kind, p).unwrap();
                for nu in 1..=p {
                    assert!(c.variance_constant(nu) > 0.0, "{kind} p={p} nu={nu}");
                }
                // CDF: smoothing lowers the variance below F(1-F)/n.
                assert!(c.variance_constant(0) < 0.0);
            }
        }
    }

    #[test]
    fn order_out_of_range() {
        assert!(matches!(
            kernel_constants(KernelKind::Uniform, MAX_KERNEL_ORDER + 1),
            Err(Error::OrderOutOfRange { .. })
        ));
    }
}
