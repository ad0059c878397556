//! Model averaging over random projections.
//!
//! Member `l` (0-based) compresses with an `m_l × p` projection, where
//! `m_l = m_min + l mod (m_max − m_min + 1)` and `ψ_l ~ U(psi_low, psi_high)`.
//! Members are fit independently; each draws its randomness from a
//! substream keyed by `(master_seed, l)`, so serial and parallel fits agree
//! bit for bit. Posterior model weights are the normalized marginal
//! likelihoods under equal prior model probabilities, computed with
//! log-sum-exp.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::distr::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conjugate::{fit_posterior, predictive, CompressedPosterior, PriorSpec, StudentT};
use crate::data::StandardizationStats;
use crate::error::{BcrError, Result};
use crate::linalg::axpy;
use crate::projection::{draw_projection, ProjectionMatrix, ProjectionSpec, PSI_MAX, PSI_MIN};
use crate::rng;

/// Half-width of the interval bracket, in member scales.
const BRACKET_SCALES: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub m_min: usize,
    pub m_max: usize,
    pub s: usize,
    pub psi_low: f64,
    pub psi_high: f64,
    pub master_seed: u64,
    pub interval_level: f64,
    /// Prior variance `v` in `Σ_β = v·I` for every member.
    pub prior_variance: f64,
}

/// Default dimension window `[⌈2 ln p⌉, min(n, p)]`.
pub fn default_window(n: usize, p: usize) -> (usize, usize) {
    let m_min = (2.0 * (p as f64).ln()).ceil().max(1.0) as usize;
    (m_min, n.min(p))
}

impl EnsembleConfig {
    /// Defaults for an `n × p` training design: the default window, one
    /// member per step of the window (`s = m_max − m_min`), `ψ ~ U(0.1, 1)`,
    /// `Σ_β = I` and 95% intervals.
    pub fn for_data(n: usize, p: usize, master_seed: u64) -> Self {
        let (m_min, m_max) = default_window(n, p);
        Self {
            m_min,
            m_max,
            s: m_max.saturating_sub(m_min).max(1),
            psi_low: PSI_MIN,
            psi_high: PSI_MAX,
            master_seed,
            interval_level: 0.95,
            prior_variance: 1.0,
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.m_min > self.m_max {
            return Err(BcrError::WindowEmpty {
                m_min: self.m_min,
                m_max: self.m_max,
            });
        }
        if self.m_min == 0 {
            return Err(BcrError::InvalidConfig("m_min must be at least 1".into()));
        }
        if self.m_max > p {
            return Err(BcrError::InvalidConfig(format!(
                "m_max = {} exceeds p = {p}",
                self.m_max
            )));
        }
        if self.s == 0 {
            return Err(BcrError::InvalidConfig("s must be at least 1".into()));
        }
        if !(self.psi_low >= PSI_MIN && self.psi_high <= PSI_MAX && self.psi_low < self.psi_high) {
            return Err(BcrError::InvalidConfig(format!(
                "psi range [{}, {}] must be a nonempty subset of [{PSI_MIN}, {PSI_MAX}]",
                self.psi_low, self.psi_high
            )));
        }
        check_level(self.interval_level)?;
        if !(self.prior_variance > 0.0 && self.prior_variance.is_finite()) {
            return Err(BcrError::InvalidConfig("prior variance must be positive".into()));
        }
        Ok(())
    }

    /// Subspace dimension of member `l` (0-based).
    pub fn member_dim(&self, l: usize) -> usize {
        self.m_min + l % (self.m_max - self.m_min + 1)
    }

    /// Sparsity parameter of member `l`, drawn from its own substream.
    pub fn member_psi(&self, l: usize) -> f64 {
        let mut r = rng::substream(self.master_seed, &[l as u64, 0]);
        loop {
            let u: f64 = r.sample(Open01);
            let psi = self.psi_low + (self.psi_high - self.psi_low) * u;
            if psi > PSI_MIN && psi < PSI_MAX {
                return psi;
            }
        }
    }

    /// Projection spec of member `l` for `p` predictors.
    pub fn member_spec(&self, l: usize, p: usize) -> Result<ProjectionSpec> {
        let seed = rng::derive_path(self.master_seed, &[l as u64, 1]);
        ProjectionSpec::new(self.member_dim(l), p, self.member_psi(l), seed)
    }

    pub fn member_prior(&self, m: usize) -> Result<PriorSpec> {
        PriorSpec::isotropic(m, self.prior_variance)
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(BcrError::InvalidConfig(format!("interval level {level} outside (0, 1)")))
    }
}

/// `exp(v − logsumexp(v))`, computed as `exp(v − max) / Σ exp(v − max)`.
pub fn normalize_log_weights(log_w: &[f64]) -> Vec<f64> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        let k = log_w.len() as f64;
        return vec![1.0 / k; log_w.len()];
    }
    let shifted: Vec<f64> = log_w.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = shifted.iter().sum();
    shifted.into_iter().map(|v| v / sum).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    /// Position in the configured sequence `0..s`.
    pub index: usize,
    pub projection: ProjectionMatrix,
    pub posterior: CompressedPosterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    config: EnsembleConfig,
    members: Vec<Member>,
    log_weights_raw: Vec<f64>,
    weights: Vec<f64>,
    dropped: Vec<usize>,
    stats: Option<StandardizationStats>,
}

/// Fits member `l` and keeps its projection.
pub fn fit_member(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &EnsembleConfig,
    l: usize,
) -> Result<Member> {
    let spec = cfg.member_spec(l, x.ncols())?;
    let projection = draw_projection(&spec)?;
    let z = projection.compress(x)?;
    let posterior = fit_posterior(&z, y, &cfg.member_prior(spec.m)?)?;
    Ok(Member {
        index: l,
        projection,
        posterior,
    })
}

/// Splits per-member results into survivors and dropped degenerate members.
fn collect_members<T>(results: Vec<Result<T>>) -> Result<(Vec<T>, Vec<usize>)> {
    let mut kept = Vec::with_capacity(results.len());
    let mut dropped = Vec::new();
    for (l, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => kept.push(v),
            Err(BcrError::NonPositiveB1 { b1, yty }) => {
                warn!("dropping degenerate member {l}: b1 = {b1:e}, y'y = {yty:e}");
                dropped.push(l);
            }
            // ψ near 1 makes nearly every raw entry −√(1/ψ), so large m can
            // exhaust the redraws; such a member is dropped like a degenerate one
            Err(BcrError::RankDeficient { row, attempts }) => {
                warn!("dropping member {l}: projection row {row} rank deficient after {attempts} draws");
                dropped.push(l);
            }
            Err(e) => {
                return Err(BcrError::Member {
                    index: l,
                    source: Box::new(e),
                })
            }
        }
    }
    if kept.is_empty() {
        return Err(BcrError::NoSurvivingMembers);
    }
    Ok((kept, dropped))
}

fn check_design(x: &DMatrix<f64>, y: &DVector<f64>, cfg: &EnsembleConfig) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(BcrError::DimensionMismatch {
            what: "design rows vs response length",
            expected: y.len(),
            found: x.nrows(),
        });
    }
    cfg.validate(x.ncols())
}

/// Fits the model-averaged ensemble on a standardized design.
pub fn fit_ensemble(x: &DMatrix<f64>, y: &DVector<f64>, cfg: &EnsembleConfig) -> Result<Ensemble> {
    check_design(x, y, cfg)?;
    let results: Vec<Result<Member>> = (0..cfg.s)
        .into_par_iter()
        .map(|l| fit_member(x, y, cfg, l))
        .collect();
    let (members, dropped) = collect_members(results)?;
    Ok(Ensemble::from_members(cfg.clone(), members, dropped, None))
}

impl Ensemble {
    /// Assembles an ensemble from fitted members, computing the weights.
    pub fn from_members(
        config: EnsembleConfig,
        members: Vec<Member>,
        dropped: Vec<usize>,
        stats: Option<StandardizationStats>,
    ) -> Self {
        let log_weights_raw: Vec<f64> = members.iter().map(|m| m.posterior.log_marginal()).collect();
        let weights = normalize_log_weights(&log_weights_raw);
        Self {
            config,
            members,
            log_weights_raw,
            weights,
            dropped,
            stats,
        }
    }

    /// Like [`Ensemble::from_members`] but with stored weights.
    pub fn from_parts(
        config: EnsembleConfig,
        members: Vec<Member>,
        weights: Vec<f64>,
        dropped: Vec<usize>,
        stats: Option<StandardizationStats>,
    ) -> Result<Self> {
        if weights.len() != members.len() {
            return Err(BcrError::DimensionMismatch {
                what: "weights vs members",
                expected: members.len(),
                found: weights.len(),
            });
        }
        let log_weights_raw = members.iter().map(|m| m.posterior.log_marginal()).collect();
        Ok(Self {
            config,
            members,
            log_weights_raw,
            weights,
            dropped,
            stats,
        })
    }

    pub fn with_stats(mut self, stats: StandardizationStats) -> Self {
        self.stats = Some(stats);
        self
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Log marginal likelihood of each surviving member.
    pub fn log_weights_raw(&self) -> &[f64] {
        &self.log_weights_raw
    }

    /// Indices of members dropped as degenerate.
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn stats(&self) -> Option<&StandardizationStats> {
        self.stats.as_ref()
    }

    pub fn p(&self) -> usize {
        self.members[0].projection.p()
    }

    fn check_x(&self, len: usize) -> Result<()> {
        if len != self.p() {
            return Err(BcrError::DimensionMismatch {
                what: "predictor vector vs ensemble p",
                expected: self.p(),
                found: len,
            });
        }
        Ok(())
    }

    /// Predictive t-mixture at a standardized covariate.
    pub fn mixture(&self, x_new: &[f64]) -> Result<Mixture> {
        self.check_x(x_new.len())?;
        let mut comps = Vec::with_capacity(self.members.len());
        for m in &self.members {
            let z = m.projection.apply(x_new)?;
            comps.push(predictive(&m.posterior, z.as_slice()));
        }
        Mixture::new(self.weights.clone(), comps)
    }

    /// `Σ w_l (Φ_l x)ᵀ μ_l`
    pub fn predict_mean(&self, x_new: &[f64]) -> Result<f64> {
        Ok(self.mixture(x_new)?.mean())
    }

    pub fn predictive_log_density(&self, x_new: &[f64], y_val: f64) -> Result<f64> {
        Ok(self.mixture(x_new)?.ln_pdf(y_val))
    }

    pub fn predictive_interval(&self, x_new: &[f64], level: f64) -> Result<(f64, f64)> {
        self.mixture(x_new)?.interval(level)
    }

    /// Model-averaged coefficients `Σ w_l Φ_lᵀ μ_l` on the standardized scale.
    pub fn gamma_mean(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.p());
        for (m, w) in self.members.iter().zip(&self.weights) {
            let lifted = m.projection.lift(m.posterior.mu().as_slice());
            axpy(*w, lifted.as_slice(), out.as_mut_slice());
        }
        out
    }

    /// Mixtures for every row of a standardized design.
    pub fn mixtures(&self, x: &DMatrix<f64>) -> Result<Vec<Mixture>> {
        self.check_x(x.ncols())?;
        let per_member: Vec<Vec<StudentT>> = self
            .members
            .iter()
            .map(|m| member_predictives(&m.projection, &m.posterior, x))
            .collect::<Result<_>>()?;
        transpose_components(&self.weights, per_member)
    }

    /// Mean and equal-tailed interval for every row of a standardized design.
    pub fn predict_batch(&self, x: &DMatrix<f64>, level: f64) -> Result<Vec<PointPrediction>> {
        check_level(level)?;
        self.mixtures(x)?
            .iter()
            .map(|mix| PointPrediction::from_mixture(mix, level))
            .collect()
    }

    /// Predictions for raw (unstandardized) rows on the response scale.
    pub fn predict_original(&self, x_raw: &DMatrix<f64>, level: f64) -> Result<Vec<PointPrediction>> {
        let stats = self.stats.as_ref().ok_or_else(|| {
            BcrError::InvalidConfig("ensemble carries no standardization stats".into())
        })?;
        let x = stats.transform_matrix(x_raw)?;
        Ok(self
            .predict_batch(&x, level)?
            .into_iter()
            .map(|p| p.shifted(stats.y_mean))
            .collect())
    }
}

/// Predictive laws of one member for every row of `x`.
pub fn member_predictives(
    projection: &ProjectionMatrix,
    posterior: &CompressedPosterior,
    x: &DMatrix<f64>,
) -> Result<Vec<StudentT>> {
    let zt = projection.compress(x)?.transpose();
    Ok(zt
        .column_iter()
        .map(|z| predictive(posterior, z.as_slice()))
        .collect())
}

fn transpose_components(weights: &[f64], per_member: Vec<Vec<StudentT>>) -> Result<Vec<Mixture>> {
    let rows = per_member.first().map_or(0, Vec::len);
    (0..rows)
        .map(|i| Mixture::new(weights.to_vec(), per_member.iter().map(|c| c[i]).collect()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointPrediction {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl PointPrediction {
    pub fn from_mixture(mix: &Mixture, level: f64) -> Result<Self> {
        let (lo, hi) = mix.interval(level)?;
        Ok(Self {
            mean: mix.mean(),
            lo,
            hi,
        })
    }

    pub fn shifted(self, by: f64) -> Self {
        Self {
            mean: self.mean + by,
            lo: self.lo + by,
            hi: self.hi + by,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn covers(&self, y: f64) -> bool {
        self.lo <= y && y <= self.hi
    }
}

/// Finite mixture of Student-t laws.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    weights: Vec<f64>,
    components: Vec<StudentT>,
}

impl Mixture {
    pub fn new(weights: Vec<f64>, components: Vec<StudentT>) -> Result<Self> {
        if weights.len() != components.len() || weights.is_empty() {
            return Err(BcrError::DimensionMismatch {
                what: "mixture weights vs components",
                expected: components.len(),
                found: weights.len(),
            });
        }
        Ok(Self {
            weights,
            components,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[StudentT] {
        &self.components
    }

    fn active(&self) -> impl Iterator<Item = (f64, &StudentT)> {
        self.weights
            .iter()
            .copied()
            .zip(&self.components)
            .filter(|(w, _)| *w > 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, t)| w * t.loc)
            .sum()
    }

    pub fn ln_pdf(&self, y: f64) -> f64 {
        let terms: Vec<f64> = self.active().map(|(w, t)| w.ln() + t.ln_pdf(y)).collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return max;
        }
        max + terms.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.ln_pdf(y).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.active().map(|(w, t)| w * t.cdf(x)).sum::<f64>().clamp(0.0, 1.0)
    }

    fn bracket(&self) -> (f64, f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut max_scale = 0.0f64;
        for (_, t) in self.active() {
            let s = t.scale();
            lo = lo.min(t.loc - BRACKET_SCALES * s);
            hi = hi.max(t.loc + BRACKET_SCALES * s);
            max_scale = max_scale.max(s);
        }
        (lo, hi, max_scale)
    }

    /// Solves `F(x) = prob` by bisection to `1e-9·(1 + scale)`.
    pub fn quantile(&self, prob: f64) -> Result<f64> {
        let (mut lo, mut hi, scale) = self.bracket();
        if !(self.cdf(lo) <= prob && self.cdf(hi) >= prob) {
            return Err(BcrError::BracketFailure { target: prob });
        }
        let tol = 1e-9 * (1.0 + scale);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < prob {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Equal-tailed interval with coverage `level`.
    pub fn interval(&self, level: f64) -> Result<(f64, f64)> {
        check_level(level)?;
        let lo = self.quantile(0.5 * (1.0 - level))?;
        let hi = self.quantile(0.5 * (1.0 + level))?;
        Ok((lo, hi))
    }
}

/// Output of [`fit_predict`]: weights and test-row mixtures without
/// retaining any projection matrix.
#[derive(Debug, Clone)]
pub struct StreamedFit {
    pub member_dims: Vec<usize>,
    pub log_marginals: Vec<f64>,
    pub weights: Vec<f64>,
    pub dropped: Vec<usize>,
    pub mixtures: Vec<Mixture>,
}

/// Fits every member and evaluates it on `x_test` immediately, dropping
/// each projection once used. Numerically identical to
/// [`fit_ensemble`] followed by [`Ensemble::mixtures`], with memory
/// bounded by one projection per worker.
pub fn fit_predict(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    x_test: &DMatrix<f64>,
    cfg: &EnsembleConfig,
) -> Result<StreamedFit> {
    check_design(x, y, cfg)?;
    if x_test.ncols() != x.ncols() {
        return Err(BcrError::DimensionMismatch {
            what: "test design columns",
            expected: x.ncols(),
            found: x_test.ncols(),
        });
    }
    let results: Vec<Result<(usize, CompressedPosterior, Vec<StudentT>)>> = (0..cfg.s)
        .into_par_iter()
        .map(|l| {
            let member = fit_member(x, y, cfg, l)?;
            let preds = member_predictives(&member.projection, &member.posterior, x_test)?;
            Ok((member.projection.m(), member.posterior, preds))
        })
        .collect();
    let (kept, dropped) = collect_members(results)?;
    let member_dims = kept.iter().map(|k| k.0).collect();
    let log_marginals: Vec<f64> = kept.iter().map(|k| k.1.log_marginal()).collect();
    let weights = normalize_log_weights(&log_marginals);
    let mixtures = transpose_components(&weights, kept.into_iter().map(|k| k.2).collect())?;
    Ok(StreamedFit {
        member_dims,
        log_marginals,
        weights,
        dropped,
        mixtures,
    })
}
