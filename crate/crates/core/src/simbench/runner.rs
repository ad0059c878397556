use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design::{gen_design, gen_response};
use super::metrics::{bootstrap_se, quantile_sorted, MetricsReport, SCHEMA_VERSION};
use super::ridge::{ridge_fit_predict, ridge_grid};
use super::scenario::Scenario;
use crate::data::{standardize, Dataset};
use crate::ensemble::{fit_predict, EnsembleConfig, PointPrediction};
use crate::error::{BcrError, Result};
use crate::rng;

pub const BOOTSTRAP_RESAMPLES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Bcr,
    Ridge,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Bcr => "BCR",
            Method::Ridge => "ridge",
        })
    }
}

impl FromStr for Method {
    type Err = BcrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bcr" => Ok(Method::Bcr),
            "ridge" | "rr" => Ok(Method::Ridge),
            _ => Err(BcrError::InvalidConfig(format!("unknown method {s:?}"))),
        }
    }
}

/// Ensemble overrides and interval level for simulation runs. Unset
/// fields fall back to [`EnsembleConfig::for_data`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub m_min: Option<usize>,
    pub m_max: Option<usize>,
    pub s: Option<usize>,
    pub psi_low: Option<f64>,
    pub psi_high: Option<f64>,
    pub prior_variance: Option<f64>,
    pub level: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            m_min: None,
            m_max: None,
            s: None,
            psi_low: None,
            psi_high: None,
            prior_variance: None,
            level: 0.95,
        }
    }
}

impl SimConfig {
    /// Ensemble configuration for an `n × p` training set.
    pub fn ensemble_config(&self, n: usize, p: usize, seed: u64) -> EnsembleConfig {
        let mut cfg = EnsembleConfig::for_data(n, p, seed);
        if let Some(v) = self.m_min {
            cfg.m_min = v;
        }
        if let Some(v) = self.m_max {
            cfg.m_max = v;
        }
        cfg.s = self
            .s
            .unwrap_or_else(|| cfg.m_max.saturating_sub(cfg.m_min).max(1));
        if let Some(v) = self.psi_low {
            cfg.psi_low = v;
        }
        if let Some(v) = self.psi_high {
            cfg.psi_high = v;
        }
        if let Some(v) = self.prior_variance {
            cfg.prior_variance = v;
        }
        cfg.interval_level = self.level;
        cfg
    }
}

/// Per-point results of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub predictions: Vec<PointPrediction>,
    pub sq_errors: Vec<f64>,
    pub covered: Vec<bool>,
}

impl ReplicateOutcome {
    pub fn mspe(&self) -> f64 {
        self.sq_errors.iter().sum::<f64>() / self.sq_errors.len() as f64
    }

    pub fn coverage(&self) -> f64 {
        self.covered.iter().filter(|c| **c).count() as f64 / self.covered.len() as f64
    }

    pub fn lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.predictions.iter().map(PointPrediction::width)
    }
}

/// Training and held-out sets of one replicate, drawn independently from
/// the scenario's generative law.
pub fn replicate_data(sc: &Scenario, replicate_seed: u64) -> Result<(Dataset, Dataset)> {
    let draw = |rows: usize, tag: u64| -> Result<Dataset> {
        let x = gen_design(rows, sc.p, sc.rho, rng::derive_path(replicate_seed, &[tag, 0]));
        let y = gen_response(&x, &sc.beta0, sc.sigma2, rng::derive_path(replicate_seed, &[tag, 1]))?;
        Dataset::new(x, y)
    };
    Ok((draw(sc.n, 0)?, draw(sc.n_test, 1)?))
}

/// Fits `method` on raw `train` (standardized internally with training
/// statistics only) and scores it on raw `test`.
pub fn evaluate_replicate(
    train: &Dataset,
    test: &Dataset,
    method: Method,
    cfg: &SimConfig,
    seed: u64,
) -> Result<ReplicateOutcome> {
    let predictions = match method {
        Method::Bcr => bcr_predictions(train, &test.x, cfg, seed)?,
        Method::Ridge => ridge_fit_predict(train, &test.x, &ridge_grid(), cfg.level)?.predictions,
    };
    let sq_errors = predictions
        .iter()
        .zip(test.y.iter())
        .map(|(p, y)| (p.mean - y).powi(2))
        .collect();
    let covered = predictions
        .iter()
        .zip(test.y.iter())
        .map(|(p, y)| p.covers(*y))
        .collect();
    Ok(ReplicateOutcome {
        predictions,
        sq_errors,
        covered,
    })
}

fn bcr_predictions(
    train: &Dataset,
    test_x: &DMatrix<f64>,
    cfg: &SimConfig,
    seed: u64,
) -> Result<Vec<PointPrediction>> {
    let (std_train, stats) = standardize(train);
    let xt = stats.transform_matrix(test_x)?;
    let ens_cfg = cfg.ensemble_config(train.n(), train.p(), seed);
    let fit = fit_predict(&std_train.x, &std_train.y, &xt, &ens_cfg)?;
    fit.mixtures
        .iter()
        .map(|mix| PointPrediction::from_mixture(mix, cfg.level).map(|p| p.shifted(stats.y_mean)))
        .collect()
}

/// Seed of replicate `index` under a master seed.
pub fn replicate_seed(master: u64, index: usize) -> u64 {
    rng::derive_seed(master, index as u64)
}

/// Runs `r` replicates with seeds derived from `seed`.
pub fn run_replicates(
    sc: &Scenario,
    method: Method,
    r: usize,
    cfg: &SimConfig,
    seed: u64,
) -> Result<MetricsReport> {
    let seeds: Vec<u64> = (0..r).map(|i| replicate_seed(seed, i)).collect();
    run_replicates_with_seeds(sc, method, &seeds, cfg, seed)
}

/// Runs one replicate per entry of `seeds`; `seed` keys the bootstrap.
pub fn run_replicates_with_seeds(
    sc: &Scenario,
    method: Method,
    seeds: &[u64],
    cfg: &SimConfig,
    seed: u64,
) -> Result<MetricsReport> {
    if seeds.len() < 2 {
        return Err(BcrError::InvalidConfig("need at least 2 replicates".into()));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(BcrError::InvalidConfig(format!("interval level {} outside (0, 1)", cfg.level)));
    }
    let start = Instant::now();
    let outcomes: Vec<ReplicateOutcome> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &rs)| {
            let (train, test) = replicate_data(sc, rs)?;
            evaluate_replicate(&train, &test, method, cfg, rng::derive_seed(rs, 2)).map_err(|e| {
                BcrError::Replicate {
                    index: i,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<_>>()?;

    let replicate_mspe: Vec<f64> = outcomes.iter().map(ReplicateOutcome::mspe).collect();
    let replicate_coverage: Vec<f64> = outcomes.iter().map(ReplicateOutcome::coverage).collect();
    let mut lengths: Vec<f64> = outcomes.iter().flat_map(|o| o.lengths()).collect();
    lengths.sort_by(f64::total_cmp);
    let r = seeds.len() as f64;
    let mspe_mean = replicate_mspe.iter().sum::<f64>() / r;
    let boot_seed = rng::derive_seed(seed, u64::MAX);

    Ok(MetricsReport {
        schema_version: SCHEMA_VERSION,
        scenario: sc.id.to_string(),
        method: method.to_string(),
        n: sc.n,
        p: sc.p,
        n_test: sc.n_test,
        n_replicates: seeds.len(),
        seed,
        level: cfg.level,
        mspe_mean,
        mspe_boot_se: bootstrap_se(&replicate_mspe, BOOTSTRAP_RESAMPLES, boot_seed),
        mspe_table_units: 0.1 * mspe_mean,
        coverage: replicate_coverage.iter().sum::<f64>() / r,
        pi_len_median: quantile_sorted(&lengths, 0.5),
        pi_len_q025: quantile_sorted(&lengths, 0.025),
        pi_len_q975: quantile_sorted(&lengths, 0.975),
        replicate_mspe,
        replicate_coverage,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
