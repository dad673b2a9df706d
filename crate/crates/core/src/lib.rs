//! Local polynomial density estimation on the empirical distribution
//! function.
//!
//! A weighted local polynomial of order `p` is fitted to `(X_j, F̂(X_j))`
//! around each evaluation point. The coefficient of order `ν` estimates the
//! `ν`-th derivative of the distribution function, so `ν = 1` gives the
//! density. The fit adapts to boundaries without knowing where they are.
//!
//! ```
//! use lpdens::{select_bandwidths, rbc_pointwise, BwConfig, BwMethod, EvalGrid, FitConfig, Sample};
//!
//! let xs: Vec<f64> = (0..500).map(|i| (i as f64 + 0.5) / 500.0).collect();
//! let sample = Sample::new(&xs, None).unwrap();
//! let grid = EvalGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
//! let cfg = FitConfig::default();
//! let bw = select_bandwidths(&sample, &grid, &BwMethod::MseDpi, &BwConfig::new(cfg.p, cfg.nu, cfg.kernel)).unwrap();
//! let table = rbc_pointwise(&sample, &bw, &cfg, 0.05).unwrap();
//! assert!((table.rows[1].est_p - 1.0).abs() < 0.1);
//! ```

pub mod bwselect;
pub mod ecdf;
pub mod error;
pub mod inference;
pub mod kernel;
pub mod lpfit;
pub mod optimize;

pub use bwselect::{
    imse_dpi, irot_bandwidth, mse_dpi, regularize_bandwidth, rot_bandwidth, select_bandwidths, BandwidthResult,
    BwConfig, BwMethod, RegularizeOpts,
};
pub use ecdf::{ingest, EvalGrid, Sample};
pub use error::{Error, Result};
pub use inference::{rbc_pointwise, scale_results, uniform_band, z_value, FitConfig, GridEstimate, InferenceTable};
pub use kernel::{classical_kde, kernel_constants, KernelConstants, KernelKind};
pub use lpfit::{fit_point, fit_point_with_se, influence, influence_covariance, rbc_estimate, PointFit, Target};
