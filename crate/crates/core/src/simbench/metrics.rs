use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng;

pub const SCHEMA_VERSION: u32 = 1;

/// Aggregate metrics of one (scenario, method) run.
///
/// Tables conventionally print `MSPE × 0.1`; `mspe_mean` here is the raw MSPE,
/// so a table entry of 0.12 corresponds to `mspe_mean ≈ 1.2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub scenario: String,
    pub method: String,
    pub n: usize,
    pub p: usize,
    pub n_test: usize,
    pub n_replicates: usize,
    pub seed: u64,
    pub level: f64,
    pub mspe_mean: f64,
    pub mspe_boot_se: f64,
    /// `mspe_mean × 0.1`, the usual table unit.
    pub mspe_table_units: f64,
    pub coverage: f64,
    pub pi_len_median: f64,
    pub pi_len_q025: f64,
    pub pi_len_q975: f64,
    pub replicate_mspe: Vec<f64>,
    pub replicate_coverage: Vec<f64>,
    /// Not serialized: reports must be byte-identical across runs.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "scenario,method,n,p,n_test,n_replicates,seed,level,mspe_mean,mspe_boot_se,mspe_table_units,coverage,pi_len_median,pi_len_q025,pi_len_q975";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.method,
            self.n,
            self.p,
            self.n_test,
            self.n_replicates,
            self.seed,
            self.level,
            self.mspe_mean,
            self.mspe_boot_se,
            self.mspe_table_units,
            self.coverage,
            self.pi_len_median,
            self.pi_len_q025,
            self.pi_len_q975
        )
    }
}

pub fn mspe(pred: &[f64], y: &[f64]) -> f64 {
    assert_eq!(pred.len(), y.len());
    pred.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64
}

/// Fraction of `y` inside `[lo, hi]`.
pub fn coverage(lo: &[f64], hi: &[f64], y: &[f64]) -> f64 {
    assert!(lo.len() == y.len() && hi.len() == y.len());
    let hits = y
        .iter()
        .zip(lo.iter().zip(hi))
        .filter(|(v, (l, h))| *l <= *v && *v <= *h)
        .count();
    hits as f64 / y.len() as f64
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Standard error of the mean of `values` from `b` bootstrap resamples:
/// the sample standard deviation of the resample means.
pub fn bootstrap_se(values: &[f64], b: usize, seed: u64) -> f64 {
    assert!(values.len() >= 2, "bootstrap needs at least two values");
    assert!(b >= 2, "bootstrap needs at least two resamples");
    let r = values.len();
    let mut rng = rng::stream(seed);
    // resample deviations from the first value; exact for constant input
    let base = values[0];
    let means: Vec<f64> = (0..b)
        .map(|_| (0..r).map(|_| values[rng.random_range(0..r)] - base).sum::<f64>() / r as f64)
        .collect();
    let mean = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    var.sqrt()
}
