//! Sparse additive regression of a scalar response on many functional
//! covariates.
//!
//! Each covariate is observed as a noisy sample on the regular grid
//! `k/n, k = 1..n`. The samples are projected onto the first `M` elements of
//! the trigonometric basis, and a group lasso over the per-covariate
//! coefficient blocks selects which functions enter the model.
//!
//! Module map:
//!
//! * [`basis`]: trigonometric basis, projection and reconstruction.
//! * [`dataset`]: functional datasets, coefficient tensors and file I/O.
//! * [`solver`]: group lasso by cyclic block coordinate descent.
//! * [`estimator`]: the full pipeline, cross-validation, refits and the
//!   raw-grid baseline.
//! * [`synth`]: synthetic data generator for support-recovery experiments.
//! * [`metrics`]: recovery metrics and the Monte-Carlo benchmark harness.

pub mod basis;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod metrics;
pub mod solver;
pub mod synth;

pub use error::{FussoError, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
