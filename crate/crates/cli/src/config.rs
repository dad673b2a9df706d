//! Command-line flags and their validation.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lpdens::bwselect::RegularizeOpts;
use lpdens::{BwMethod, EvalGrid, FitConfig, KernelKind, Sample};

use crate::error::CliError;
use crate::simulate::{Dgp, SimConfig, DEFAULT_POINTS};

#[derive(Debug, Parser)]
#[command(
    name = "lpdens",
    version,
    about = "Local polynomial density estimation with robust bias-corrected inference"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate on a grid and report point estimates with confidence intervals.
    Fit(FitArgs),
    /// Report selected bandwidths only.
    Bw(BwArgs),
    /// Run the Monte Carlo design on simulated data.
    Simulate(SimArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Data file (CSV or whitespace separated); `-` reads standard input.
    pub input: PathBuf,
    /// Data column, by header name or 1-based position.
    #[arg(long, default_value = "1")]
    pub column: String,
    /// Optional weights column, by header name or 1-based position.
    #[arg(long)]
    pub weights_col: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Explicit evaluation points, comma separated and increasing.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with_all = ["grid_range", "grid_quantiles"])]
    pub grid: Option<Vec<f64>>,
    /// Evenly spaced grid as `lo,hi,step`.
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 1,
        allow_negative_numbers = true,
        conflicts_with = "grid_quantiles"
    )]
    pub grid_range: Option<Vec<f64>>,
    /// Grid at the i/(k+1) sample quantiles (used by default with k = 19).
    #[arg(long)]
    pub grid_quantiles: Option<usize>,
}

impl GridArgs {
    pub fn resolve(&self, sample: &Sample) -> Result<EvalGrid, CliError> {
        let cfg = |e: lpdens::Error| CliError::Config(e.to_string());
        if let Some(points) = &self.grid {
            return EvalGrid::new(points.clone()).map_err(cfg);
        }
        if let Some(r) = &self.grid_range {
            let [lo, hi, step] = r[..] else {
                return Err(CliError::Config(format!(
                    "--grid-range expects lo,hi,step; got {} values",
                    r.len()
                )));
            };
            return EvalGrid::range(lo, hi, step).map_err(cfg);
        }
        match self.grid_quantiles {
            Some(0) => Err(CliError::Config("--grid-quantiles must be positive".into())),
            Some(k) => Ok(sample.quantile_grid(k)),
            None => Ok(sample.quantile_grid(19)),
        }
    }
}

/// Options shared by `fit` and `bw`.
#[derive(Debug, Clone, Args)]
pub struct EstArgs {
    /// Polynomial order of the point estimate.
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    /// Derivative of the distribution function to estimate (1 = density).
    #[arg(long, default_value_t = 1)]
    pub v: usize,
    #[arg(long, default_value = "triangular")]
    pub kernel: KernelKind,
    /// mse-dpi, imse-dpi, mse-rot or imse-rot; ignored when --bw is given.
    #[arg(long, default_value = "mse-dpi")]
    pub bwselect: BwMethod,
    /// User bandwidth: one value, or one per grid point.
    #[arg(long, value_delimiter = ',')]
    pub bw: Option<Vec<f64>>,
    /// Minimum observations inside each window (default 20 + p + 1).
    #[arg(long)]
    pub nlocalmin: Option<usize>,
    /// Minimum distinct values inside each window (default 20 + p + 1).
    #[arg(long)]
    pub nuniquemin: Option<usize>,
    /// Disable minimum-sample bandwidth regularization.
    #[arg(long)]
    pub no_regularize: bool,
    /// Treat tied values as separate observations.
    #[arg(long)]
    pub no_masspoints: bool,
    /// Rows between dashed rules in table output; 0 disables them.
    #[arg(long, default_value_t = 5)]
    pub sep: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

impl EstArgs {
    pub fn method(&self) -> BwMethod {
        match &self.bw {
            Some(h) => BwMethod::User(h.clone()),
            None => self.bwselect.clone(),
        }
    }

    pub fn regularize(&self) -> RegularizeOpts {
        let mut opts = RegularizeOpts::for_order(self.p);
        opts.enabled = !self.no_regularize;
        if let Some(k) = self.nlocalmin {
            opts.n_local_min = k;
        }
        if let Some(k) = self.nuniquemin {
            opts.n_unique_min = k;
        }
        opts
    }

    fn check_orders(&self) -> Result<(), CliError> {
        if self.v > self.p {
            return Err(CliError::Config(format!("v = {} exceeds p = {}", self.v, self.p)));
        }
        if let Some(h) = &self.bw {
            if h.is_empty() {
                return Err(CliError::Config("--bw needs at least one value".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub est: EstArgs,
    /// Polynomial order of the interval (default p + 1; p gives conventional intervals).
    #[arg(long)]
    pub q: Option<usize>,
    /// One minus the nominal coverage.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Report a uniform band instead of pointwise intervals.
    #[arg(long)]
    pub ciuniform: bool,
    /// Simulation draws for the uniform critical value.
    #[arg(long, default_value_t = 2000)]
    pub cisimul: usize,
    /// Multiplies estimates and standard errors, e.g. the share of a subsample.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Seed of the multiplier draws.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

impl FitArgs {
    pub fn fit_config(&self) -> Result<FitConfig, CliError> {
        self.est.check_orders()?;
        let q = self.q.unwrap_or(self.est.p + 1);
        let cfg =
            FitConfig::new(self.est.p, q, self.est.v, self.est.kernel).map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(CliError::Config(format!("scale must be positive, got {}", self.scale)));
        }
        if self.ciuniform && self.cisimul < 100 {
            return Err(CliError::Config(format!(
                "--cisimul must be at least 100, got {}",
                self.cisimul
            )));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct BwArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub est: EstArgs,
}

impl BwArgs {
    pub fn validate(&self) -> Result<(), CliError> {
        self.est.check_orders()?;
        if self.est.p > lpdens::inference::MAX_FIT_ORDER {
            return Err(CliError::Config(format!(
                "p = {} exceeds the maximum of {}",
                self.est.p,
                lpdens::inference::MAX_FIT_ORDER
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// truncnorm (N(1,1) truncated below at 0) or exponential.
    #[arg(long, default_value = "truncnorm")]
    pub dgp: String,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub reps: usize,
    /// Evaluation points.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub points: Option<Vec<f64>>,
    /// mse-dpi or imse-dpi.
    #[arg(long, default_value = "mse-dpi")]
    pub bwselect: BwMethod,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub v: usize,
    #[arg(long, default_value = "triangular")]
    pub kernel: KernelKind,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Also report a fixed-kernel density estimator at the same bandwidths.
    #[arg(long)]
    pub baseline: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

impl SimArgs {
    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let dgp: Dgp = self.dgp.parse()?;
        let q = self.q.unwrap_or(self.p + 1);
        let fit = FitConfig::new(self.p, q, self.v, self.kernel).map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        let mut cfg = SimConfig::new(dgp, self.bwselect.clone());
        cfg.n = self.n;
        cfg.reps = self.reps;
        cfg.points = self.points.clone().unwrap_or_else(|| DEFAULT_POINTS.to_vec());
        cfg.fit = fit;
        cfg.alpha = self.alpha;
        cfg.seed = self.seed;
        cfg.baseline = self.baseline;
        Ok(cfg)
    }
}
