//! Simulation benchmark: the moderate- and high-dimensional scenarios,
//! a closed-form ridge baseline, and the reported metrics (MSPE with its
//! bootstrap standard error, interval coverage and lengths).

pub mod design;
pub mod metrics;
pub mod ridge;
pub mod runner;
pub mod scenario;

pub use design::{gen_design, gen_response, gen_response_with_noise};
pub use metrics::{bootstrap_se, coverage, mspe, quantile_sorted, MetricsReport, SCHEMA_VERSION};
pub use ridge::{ridge_fit, ridge_fit_predict, ridge_grid, RidgeFit, RidgeOutput};
pub use runner::{
    evaluate_replicate, replicate_data, run_replicates, run_replicates_with_seeds, Method,
    ReplicateOutcome, SimConfig,
};
pub use scenario::{scenario, Scenario, ScenarioId};
