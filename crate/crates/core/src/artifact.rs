//! Versioned JSON artifact for a fitted ensemble.
//!
//! Projections are stored by spec and redrawn on load, which reproduces them
//! bit for bit. Floats are written in shortest round-trip form, so
//! `load(save(e)) == e` exactly.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::conjugate::CompressedPosterior;
use crate::data::StandardizationStats;
use crate::ensemble::{Ensemble, EnsembleConfig, Member};
use crate::error::{BcrError, Result};
use crate::projection::{draw_projection, ProjectionSpec};

pub const FORMAT: &str = "bcr-ensemble";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PosteriorRecord {
    mu: Vec<f64>,
    /// Lower factor of `A`, row-major, lower triangle only.
    chol_lower: Vec<f64>,
    b1: f64,
    n: usize,
    log_marginal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MemberRecord {
    index: usize,
    projection: ProjectionSpec,
    posterior: PosteriorRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EnsembleRecord {
    format: String,
    version: u32,
    config: EnsembleConfig,
    p: usize,
    members: Vec<MemberRecord>,
    weights: Vec<f64>,
    dropped: Vec<usize>,
    stats: Option<StandardizationStats>,
}

impl PosteriorRecord {
    fn from_posterior(post: &CompressedPosterior) -> Self {
        let l = post.chol_a();
        let m = l.nrows();
        let mut chol_lower = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            for j in 0..=i {
                chol_lower.push(l[(i, j)]);
            }
        }
        Self {
            mu: post.mu().as_slice().to_vec(),
            chol_lower,
            b1: post.b1(),
            n: post.n(),
            log_marginal: post.log_marginal(),
        }
    }

    fn into_posterior(self) -> Result<CompressedPosterior> {
        let m = self.mu.len();
        if self.chol_lower.len() != m * (m + 1) / 2 {
            return Err(BcrError::Artifact(format!(
                "factor has {} entries, expected {}",
                self.chol_lower.len(),
                m * (m + 1) / 2
            )));
        }
        let mut l = DMatrix::zeros(m, m);
        let mut it = self.chol_lower.into_iter();
        for i in 0..m {
            for j in 0..=i {
                l[(i, j)] = it.next().expect("length checked");
            }
        }
        CompressedPosterior::from_parts(self.mu, l, self.b1, self.n, self.log_marginal)
    }
}

/// Serializes a fitted ensemble.
pub fn to_bytes(ens: &Ensemble) -> Result<Vec<u8>> {
    let record = EnsembleRecord {
        format: FORMAT.to_string(),
        version: VERSION,
        config: ens.config().clone(),
        p: ens.p(),
        members: ens
            .members()
            .iter()
            .map(|m| MemberRecord {
                index: m.index,
                projection: *m.projection.spec(),
                posterior: PosteriorRecord::from_posterior(&m.posterior),
            })
            .collect(),
        weights: ens.weights().to_vec(),
        dropped: ens.dropped().to_vec(),
        stats: ens.stats().cloned(),
    };
    let mut out = serde_json::to_vec_pretty(&record).map_err(|e| BcrError::Artifact(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Restores an ensemble, redrawing every projection from its spec.
pub fn from_bytes(bytes: &[u8]) -> Result<Ensemble> {
    let record: EnsembleRecord =
        serde_json::from_slice(bytes).map_err(|e| BcrError::Artifact(e.to_string()))?;
    if record.format != FORMAT {
        return Err(BcrError::Artifact(format!("unexpected format {:?}", record.format)));
    }
    if record.version != VERSION {
        return Err(BcrError::Artifact(format!(
            "unsupported version {} (expected {VERSION})",
            record.version
        )));
    }
    if record.members.is_empty() {
        return Err(BcrError::Artifact("no members".into()));
    }
    let mut members = Vec::with_capacity(record.members.len());
    for m in record.members {
        if m.projection.p != record.p || m.posterior.mu.len() != m.projection.m {
            return Err(BcrError::Artifact(format!("member {} has inconsistent dimensions", m.index)));
        }
        members.push(Member {
            index: m.index,
            projection: draw_projection(&m.projection)?,
            posterior: m.posterior.into_posterior()?,
        });
    }
    Ensemble::from_parts(record.config, members, record.weights, record.dropped, record.stats)
}

pub fn save(ens: &Ensemble, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_bytes(ens)?)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Ensemble> {
    from_bytes(&std::fs::read(path)?)
}
