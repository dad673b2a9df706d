//! Sample ingestion, weighted empirical CDF, quantile grids and
//! effective-sample-size counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An immutable sorted sample with normalized weights and its empirical CDF.
#[derive(Debug, Clone)]
pub struct Sample {
    x: Vec<f64>,
    w: Vec<f64>,
    /// Right-continuous ECDF at each observation; ties share the value.
    fhat: Vec<f64>,
    /// Running cumulative weight along the sorted order (ties staggered).
    fhat_seq: Vec<f64>,
    unique_x: Vec<f64>,
    unique_count: Vec<usize>,
    unique_w: Vec<f64>,
    unique_fhat: Vec<f64>,
    mass_points: bool,
}

/// Rows entering a local regression: distinct values with merged weights when
/// mass-point handling is on, individual observations otherwise.
#[derive(Debug, Clone, Copy)]
pub struct DesignRows<'a> {
    pub x: &'a [f64],
    pub w: &'a [f64],
    pub y: &'a [f64],
}

/// Builds a [`Sample`]; alias of [`Sample::new`].
pub fn ingest(values: &[f64], weights: Option<&[f64]>) -> Result<Sample> {
    Sample::new(values, weights)
}

impl Sample {
    pub fn new(values: &[f64], weights: Option<&[f64]>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if values.len() < 2 {
            return Err(Error::TooFewObservations {
                min: 2,
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        let n = values.len();
        let raw_w: Vec<f64> = match weights {
            None => vec![1.0; n],
            Some(w) => {
                if w.len() != n {
                    return Err(Error::InvalidWeights(format!("expected {n} weights, got {}", w.len())));
                }
                if let Some(i) = w.iter().position(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidWeights(format!(
                        "weight at position {i} is negative or non-finite"
                    )));
                }
                w.to_vec()
            }
        };
        let total: f64 = raw_w.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidWeights("all weights are zero".into()));
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let x: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        if x[0] == x[n - 1] {
            return Err(Error::DegenerateSample);
        }
        let scale = n as f64 / total;
        let w: Vec<f64> = order.iter().map(|&i| raw_w[i] * scale).collect();

        let mut fhat_seq = Vec::with_capacity(n);
        let mut acc = 0.0;
        for wi in &w {
            acc += wi;
            fhat_seq.push(acc / n as f64);
        }
        fhat_seq[n - 1] = 1.0;

        let mut fhat = fhat_seq.clone();
        let mut unique_x = Vec::new();
        let mut unique_count = Vec::new();
        let mut unique_w = Vec::new();
        let mut unique_fhat = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && x[end] == x[start] {
                end += 1;
            }
            let top = fhat_seq[end - 1];
            fhat[start..end].fill(top);
            unique_x.push(x[start]);
            unique_count.push(end - start);
            unique_w.push(w[start..end].iter().sum());
            unique_fhat.push(top);
            start = end;
        }

        Ok(Sample {
            x,
            w,
            fhat,
            fhat_seq,
            unique_x,
            unique_count,
            unique_w,
            unique_fhat,
            mass_points: true,
        })
    }

    /// Toggles mass-point handling (on by default). When off, every
    /// observation enters the design as its own row and tied observations
    /// receive staggered cumulative ECDF values.
    pub fn with_mass_points(mut self, on: bool) -> Self {
        self.mass_points = on;
        self
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn fhat(&self) -> &[f64] {
        &self.fhat
    }

    pub fn unique_x(&self) -> &[f64] {
        &self.unique_x
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.unique_count
    }

    pub fn has_mass_points(&self) -> bool {
        self.unique_x.len() < self.x.len()
    }

    pub fn mass_points(&self) -> bool {
        self.mass_points
    }

    pub fn min(&self) -> f64 {
        self.x[0]
    }

    pub fn max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    pub fn design_rows(&self) -> DesignRows<'_> {
        if self.mass_points {
            DesignRows {
                x: &self.unique_x,
                w: &self.unique_w,
                y: &self.unique_fhat,
            }
        } else {
            DesignRows {
                x: &self.x,
                w: &self.w,
                y: &self.fhat_seq,
            }
        }
    }

    /// `(1/n) Σ w_j 1(X_j <= x)`.
    pub fn ecdf_at(&self, x: f64) -> f64 {
        let idx = self.x.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.fhat[idx - 1]
        }
    }

    /// Left-continuous inverse of the ECDF: the smallest observation whose
    /// ECDF value reaches `level`.
    pub fn quantile(&self, level: f64) -> f64 {
        let idx = self.fhat.partition_point(|&f| f < level - 1e-12);
        self.x[idx.min(self.x.len() - 1)]
    }

    /// Empirical quantiles at levels `i/(k+1)`, `i = 1..=k`, duplicates
    /// collapsed.
    pub fn quantile_grid(&self, k: usize) -> EvalGrid {
        let k = k.max(1);
        let mut points: Vec<f64> = (1..=k).map(|i| self.quantile(i as f64 / (k as f64 + 1.0))).collect();
        points.dedup();
        EvalGrid { points }
    }

    /// Index range of observations with `|X_i - x| <= h`.
    pub fn window(&self, x: f64, h: f64) -> (usize, usize) {
        window_of(&self.x, x, h)
    }

    /// Number of observations with `|X_i - x| <= h`.
    pub fn effective_n(&self, x: f64, h: f64) -> usize {
        let (lo, hi) = self.window(x, h);
        hi - lo
    }

    /// Number of distinct values with `|X_i - x| <= h`.
    pub fn effective_n_unique(&self, x: f64, h: f64) -> usize {
        let (lo, hi) = window_of(&self.unique_x, x, h);
        hi - lo
    }

    /// Weighted mean and standard deviation (divisor `n - 1`).
    pub fn mean_sd(&self) -> (f64, f64) {
        let n = self.n() as f64;
        let mean = self.x.iter().zip(&self.w).map(|(x, w)| w * x).sum::<f64>() / n;
        let ss: f64 = self.x.iter().zip(&self.w).map(|(x, w)| w * (x - mean).powi(2)).sum();
        (mean, (ss / (n - 1.0)).sqrt())
    }

    /// Distance from `x` to its `k`-th nearest observation (`k >= 1`), or
    /// `None` when the sample has fewer than `k` observations.
    pub fn kth_nearest_distance(&self, x: f64, k: usize) -> Option<f64> {
        kth_nearest(&self.x, x, k)
    }

    /// Same as [`Sample::kth_nearest_distance`] over distinct values.
    pub fn kth_nearest_unique_distance(&self, x: f64, k: usize) -> Option<f64> {
        kth_nearest(&self.unique_x, x, k)
    }
}

pub(crate) fn window_of(sorted: &[f64], x: f64, h: f64) -> (usize, usize) {
    let lo = sorted.partition_point(|&v| v < x - h);
    let hi = sorted.partition_point(|&v| v <= x + h);
    (lo, hi.max(lo))
}

fn kth_nearest(sorted: &[f64], x: f64, k: usize) -> Option<f64> {
    if k == 0 || k > sorted.len() {
        return None;
    }
    // merge outward from the insertion point
    let mut right = sorted.partition_point(|&v| v < x);
    let mut left = right;
    let mut dist = 0.0;
    for _ in 0..k {
        let dl = if left > 0 { x - sorted[left - 1] } else { f64::INFINITY };
        let dr = if right < sorted.len() {
            sorted[right] - x
        } else {
            f64::INFINITY
        };
        if dl <= dr {
            dist = dl;
            left -= 1;
        } else {
            dist = dr;
            right += 1;
        }
    }
    Some(dist)
}

/// Strictly increasing, nonempty list of evaluation points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalGrid {
    points: Vec<f64>,
}

impl EvalGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("evaluation grid is empty".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("evaluation grid has non-finite points".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "evaluation grid must be strictly increasing".into(),
            ));
        }
        Ok(EvalGrid { points })
    }

    /// `lo, lo + step, ...` up to `hi` inclusive.
    pub fn range(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if step.is_nan() || step <= 0.0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err(Error::InvalidParameter(format!(
                "invalid grid range {lo}..{hi} step {step}"
            )));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        EvalGrid::new((0..=count).map(|i| lo + i as f64 * step).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
