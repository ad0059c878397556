//! Bayesian compressed regression.
//!
//! High-dimensional predictors are compressed with sparse random projections
//! whose rows are orthonormalized, a conjugate normal–inverse-gamma model is
//! fit exactly on each compressed design, and predictions are averaged over
//! many projections with weights proportional to their marginal likelihoods.
//!
//! The crate is organized bottom-up:
//!
//! - [`projection`]: drawing, validating and applying projection matrices
//! - [`conjugate`]: closed-form posterior, predictive and marginal likelihood
//! - [`ensemble`]: model averaging over projections, mixture predictive
//! - [`data`]: datasets, standardization, CSV ingestion
//! - [`simbench`]: simulation scenarios, ridge baseline and metrics
//!
//! Supporting modules: [`linalg`] (small dense factorizations), [`special`]
//! (log-gamma, incomplete beta, normal quantile) and [`rng`] (seed
//! substreams).

pub mod artifact;
pub mod conjugate;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod linalg;
pub mod projection;
pub mod rng;
pub mod simbench;
pub mod special;

pub use conjugate::{
    fit_posterior, log_marginal, predictive, student_t_cdf, CompressedPosterior, PriorSpec,
    StudentT,
};
pub use data::{
    apply_transform, load_csv, standardize, CsvOptions, Dataset, ResponseColumn,
    StandardizationStats,
};
pub use ensemble::{fit_ensemble, Ensemble, EnsembleConfig, Member, Mixture};
pub use error::{BcrError, Result};
pub use projection::{compress, draw_projection, ProjectionMatrix, ProjectionSpec};
pub use simbench::{MetricsReport, Method, Scenario, ScenarioId};

/// Re-exported so downstream crates use the same matrix types.
pub use nalgebra::{DMatrix, DVector};
