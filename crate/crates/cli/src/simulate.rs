//! Monte Carlo harness for the truncated-normal and exponential designs.
//!
//! Replication `r` draws its sample from a ChaCha8 generator seeded with the
//! run seed and switched to stream `r`, so reports are reproducible across
//! platforms and thread counts.

use std::fmt;
use std::str::FromStr;

use lpdens::kernel::classical_kde;
use lpdens::{
    rbc_pointwise, select_bandwidths, z_value, BandwidthResult, BwConfig, BwMethod, EvalGrid, FitConfig, Sample,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::CliError;

/// Evaluation points of the default design.
pub const DEFAULT_POINTS: [f64; 3] = [1.5, 0.2, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dgp {
    /// N(1, 1) truncated from below at 0.
    Truncnorm,
    /// Standard exponential.
    Exponential,
}

impl Dgp {
    pub fn density(self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self {
            Dgp::Truncnorm => {
                let z = Normal::standard();
                z.pdf(x - 1.0) / z.cdf(1.0)
            }
            Dgp::Exponential => (-x).exp(),
        }
    }

    pub fn draw<R: Rng>(self, rng: &mut R, n: usize) -> Vec<f64> {
        match self {
            Dgp::Truncnorm => (0..n)
                .map(|_| loop {
                    let v = 1.0 + rng.sample::<f64, _>(StandardNormal);
                    if v > 0.0 {
                        break v;
                    }
                })
                .collect(),
            Dgp::Exponential => (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect(),
        }
    }
}

impl fmt::Display for Dgp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dgp::Truncnorm => "truncnorm",
            Dgp::Exponential => "exponential",
        })
    }
}

impl FromStr for Dgp {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "truncnorm" => Ok(Dgp::Truncnorm),
            "exponential" | "exp" => Ok(Dgp::Exponential),
            other => Err(CliError::Config(format!(
                "unknown DGP '{other}' (truncnorm, exponential)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dgp: Dgp,
    pub n: usize,
    pub reps: usize,
    pub points: Vec<f64>,
    /// `MseDpi` or `ImseDpi`; the integrated selector runs on the 19
    /// quantile grid of each replication.
    pub method: BwMethod,
    pub fit: FitConfig,
    pub alpha: f64,
    pub seed: u64,
    /// Also evaluate a fixed-kernel density estimator at the same bandwidths.
    pub baseline: bool,
}

impl SimConfig {
    pub fn new(dgp: Dgp, method: BwMethod) -> Self {
        SimConfig {
            dgp,
            n: 1000,
            reps: 2000,
            points: DEFAULT_POINTS.to_vec(),
            method,
            fit: FitConfig::default(),
            alpha: 0.05,
            seed: 42,
            baseline: false,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.reps < 50 {
            return Err(CliError::Config(format!(
                "at least 50 replications are required, got {}",
                self.reps
            )));
        }
        if !matches!(self.method, BwMethod::MseDpi | BwMethod::ImseDpi) {
            return Err(CliError::Config(format!(
                "simulate supports mse-dpi and imse-dpi, got {}",
                self.method
            )));
        }
        if self.points.is_empty() {
            return Err(CliError::Config("no evaluation points".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub x: f64,
    pub truth: f64,
    pub bias: f64,
    /// Standard deviation across replications (divisor = replications).
    pub sd: f64,
    pub rmse: f64,
    /// Empirical coverage of the interval.
    pub ec: f64,
    /// Mean interval length.
    pub il: f64,
    pub mean_h: f64,
    /// Replications that produced a finite estimate.
    pub used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub dgp: Dgp,
    pub n: usize,
    pub reps: usize,
    pub method: BwMethod,
    pub seed: u64,
    pub points: Vec<PointSummary>,
    pub baseline: Option<Vec<PointSummary>>,
}

#[derive(Debug, Clone, Copy)]
struct Draw {
    h: f64,
    est: f64,
    lo: f64,
    hi: f64,
}

struct RepOutcome {
    lp: Vec<Option<Draw>>,
    kde: Vec<Option<Draw>>,
}

fn bandwidths(sample: &Sample, grid: &EvalGrid, cfg: &SimConfig) -> lpdens::Result<BandwidthResult> {
    let bw_cfg = BwConfig::new(cfg.fit.p, cfg.fit.nu, cfg.fit.kernel);
    match cfg.method {
        BwMethod::ImseDpi => {
            let common = select_bandwidths(sample, &sample.quantile_grid(19), &BwMethod::ImseDpi, &bw_cfg)?;
            BandwidthResult::user(sample, grid, &common.h[..1])
        }
        _ => select_bandwidths(sample, grid, &cfg.method, &bw_cfg),
    }
}

fn replicate(cfg: &SimConfig, grid: &EvalGrid, rep: usize) -> RepOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep as u64);
    let data = cfg.dgp.draw(&mut rng, cfg.n);
    let m = grid.len();
    let empty = || RepOutcome {
        lp: vec![None; m],
        kde: vec![None; m],
    };
    let Ok(sample) = Sample::new(&data, None) else {
        return empty();
    };
    let bw = match bandwidths(&sample, grid, cfg) {
        Ok(bw) => bw,
        Err(e) => {
            log::warn!("replication {rep}: bandwidth selection failed ({e})");
            return empty();
        }
    };
    let lp = match rbc_pointwise(&sample, &bw, &cfg.fit, cfg.alpha) {
        Ok(t) => t
            .rows
            .iter()
            .map(|r| {
                r.ok().then_some(Draw {
                    h: r.h,
                    est: r.est_p,
                    lo: r.ci_lo,
                    hi: r.ci_hi,
                })
            })
            .collect(),
        Err(_) => vec![None; m],
    };
    let kde = if cfg.baseline {
        let z = z_value(cfg.alpha);
        grid.points()
            .iter()
            .zip(&bw.h)
            .map(|(&x, &h)| {
                let (est, se) = classical_kde(&sample, x, h, cfg.fit.kernel);
                Some(Draw {
                    h,
                    est,
                    lo: est - z * se,
                    hi: est + z * se,
                })
            })
            .collect()
    } else {
        vec![None; m]
    };
    RepOutcome { lp, kde }
}

fn summarize(x: f64, truth: f64, draws: impl Iterator<Item = Draw>) -> PointSummary {
    let draws: Vec<Draw> = draws.filter(|d| d.est.is_finite()).collect();
    let k = draws.len() as f64;
    let mean = |f: &dyn Fn(&Draw) -> f64| draws.iter().map(f).sum::<f64>() / k;
    let mean_est = mean(&|d| d.est);
    let bias = mean_est - truth;
    let sd = mean(&|d| (d.est - mean_est).powi(2)).sqrt();
    PointSummary {
        x,
        truth,
        bias,
        sd,
        rmse: mean(&|d| (d.est - truth).powi(2)).sqrt(),
        ec: mean(&|d| f64::from(u8::from(d.lo <= truth && truth <= d.hi))),
        il: mean(&|d| d.hi - d.lo),
        mean_h: mean(&|d| d.h),
        used: draws.len(),
    }
}

pub fn run_simulation(cfg: &SimConfig) -> Result<SimReport, CliError> {
    cfg.validate()?;
    let mut sorted = cfg.points.clone();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let grid = EvalGrid::new(sorted).map_err(|e| CliError::Config(e.to_string()))?;
    let outcomes: Vec<RepOutcome> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| replicate(cfg, &grid, r))
        .collect();

    let collect = |pick: fn(&RepOutcome) -> &Vec<Option<Draw>>| -> Vec<PointSummary> {
        cfg.points
            .iter()
            .map(|&x| {
                let g = grid.points().iter().position(|&v| v == x).expect("point on grid");
                summarize(x, cfg.dgp.density(x), outcomes.iter().filter_map(|o| pick(o)[g]))
            })
            .collect()
    };
    let points = collect(|o| &o.lp);
    if points.iter().all(|p| p.used == 0) {
        return Err(CliError::Estimation("every replication failed".into()));
    }
    Ok(SimReport {
        dgp: cfg.dgp,
        n: cfg.n,
        reps: cfg.reps,
        method: cfg.method.clone(),
        seed: cfg.seed,
        baseline: cfg.baseline.then(|| collect(|o| &o.kde)),
        points,
    })
}
