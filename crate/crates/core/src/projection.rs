//! Sparse random projections with orthonormal rows.
//!
//! Raw entries follow a three-point law on `{−√(1/ψ), 0, +√(1/ψ)}` with
//! probabilities `(ψ², 2ψ(1−ψ), (1−ψ)²)`. Rows are then orthonormalized
//! by modified Gram-Schmidt with one reorthogonalization pass, so that
//! `ΦΦᵀ = I` and `‖Φx‖ ≤ ‖x‖` for every `x`.
//!
//! The matrix is stored transposed (`p × m`, one orthonormal row of `Φ`
//! per column) so rows are contiguous and `XΦᵀ` is a plain product.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BcrError, Result};
use crate::linalg::{axpy, dot, norm2};
use crate::rng;

/// Redraw budget for a row that collapses during orthonormalization.
pub const MAX_ROW_ATTEMPTS: usize = 100;

/// A row whose residual norm falls below this fraction of its raw norm is
/// treated as linearly dependent on the rows before it.
pub const PIVOT_TOLERANCE: f64 = 1e-8;

pub const PSI_MIN: f64 = 0.1;
pub const PSI_MAX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSpec {
    pub m: usize,
    pub p: usize,
    pub psi: f64,
    pub seed: u64,
}

impl ProjectionSpec {
    pub fn new(m: usize, p: usize, psi: f64, seed: u64) -> Result<Self> {
        let spec = Self { m, p, psi, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.p == 0 {
            return Err(BcrError::InvalidSpec(format!(
                "m and p must be positive (m = {}, p = {})",
                self.m, self.p
            )));
        }
        if self.m > self.p {
            return Err(BcrError::InvalidSpec(format!(
                "m = {} exceeds p = {}",
                self.m, self.p
            )));
        }
        if !(self.psi > PSI_MIN && self.psi < PSI_MAX) {
            return Err(BcrError::InvalidSpec(format!(
                "psi = {} outside ({PSI_MIN}, {PSI_MAX})",
                self.psi
            )));
        }
        Ok(())
    }
}

/// The three-point law of raw projection entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryLaw {
    magnitude: f64,
    p_negative: f64,
    p_nonpositive: f64,
}

impl EntryLaw {
    pub fn new(psi: f64) -> Self {
        let p_negative = psi * psi;
        Self {
            magnitude: (1.0 / psi).sqrt(),
            p_negative,
            p_nonpositive: p_negative + 2.0 * psi * (1.0 - psi),
        }
    }

    /// Support points in increasing order.
    pub fn support(&self) -> [f64; 3] {
        [-self.magnitude, 0.0, self.magnitude]
    }

    /// Probabilities of the support points.
    pub fn probabilities(&self) -> [f64; 3] {
        [
            self.p_negative,
            self.p_nonpositive - self.p_negative,
            1.0 - self.p_nonpositive,
        ]
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        if u < self.p_negative {
            -self.magnitude
        } else if u < self.p_nonpositive {
            0.0
        } else {
            self.magnitude
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for v in out {
            *v = self.sample(rng);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    spec: ProjectionSpec,
    basis: DMatrix<f64>,
}

/// Raw row `row`, redraw attempt `attempt`.
fn draw_raw_row(spec: &ProjectionSpec, law: &EntryLaw, row: usize, attempt: usize, out: &mut [f64]) {
    let mut r = rng::substream(spec.seed, &[row as u64, attempt as u64]);
    law.fill(&mut r, out);
}

/// The raw rows a spec starts from, before orthonormalization or any
/// redraws, as an `m × p` matrix.
pub fn draw_raw_rows(spec: &ProjectionSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let law = EntryLaw::new(spec.psi);
    let mut raw = DMatrix::<f64>::zeros(spec.p, spec.m);
    for (i, mut col) in raw.column_iter_mut().enumerate() {
        draw_raw_row(spec, &law, i, 0, col.as_mut_slice());
    }
    Ok(raw.transpose())
}

/// Orthogonalizes `v` against the orthonormal rows in `done` (two MGS
/// sweeps) and normalizes it. Returns `false` if `v` collapsed.
fn orthonormalize_against(done: &[f64], p: usize, v: &mut [f64]) -> bool {
    let raw_norm = norm2(v);
    if !(raw_norm > 0.0) {
        return false;
    }
    for _sweep in 0..2 {
        for q in done.chunks_exact(p) {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }
    let norm = norm2(v);
    if !(norm > PIVOT_TOLERANCE * raw_norm) {
        return false;
    }
    let inv = 1.0 / norm;
    v.iter_mut().for_each(|x| *x *= inv);
    true
}

/// Draws the projection described by `spec`.
pub fn draw_projection(spec: &ProjectionSpec) -> Result<ProjectionMatrix> {
    spec.validate()?;
    let (m, p) = (spec.m, spec.p);
    let law = EntryLaw::new(spec.psi);
    let mut data = vec![0.0f64; m * p];
    for row in 0..m {
        let (done, rest) = data.split_at_mut(row * p);
        let v = &mut rest[..p];
        let mut accepted = false;
        for attempt in 0..MAX_ROW_ATTEMPTS {
            draw_raw_row(spec, &law, row, attempt, v);
            if orthonormalize_against(done, p, v) {
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(BcrError::RankDeficient {
                row,
                attempts: MAX_ROW_ATTEMPTS,
            });
        }
    }
    Ok(ProjectionMatrix {
        spec: *spec,
        basis: DMatrix::from_vec(p, m, data),
    })
}

impl ProjectionMatrix {
    pub fn spec(&self) -> &ProjectionSpec {
        &self.spec
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    pub fn p(&self) -> usize {
        self.spec.p
    }

    /// Row `i` of `Φ`.
    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.p();
        &self.basis.as_slice()[i * p..(i + 1) * p]
    }

    /// `Φᵀ` as a `p × m` matrix.
    pub fn transposed(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `Φ` as an `m × p` matrix (copied).
    pub fn to_matrix(&self) -> DMatrix<f64> {
        self.basis.transpose()
    }

    /// `ΦΦᵀ`
    pub fn gram(&self) -> DMatrix<f64> {
        self.basis.tr_mul(&self.basis)
    }

    /// Largest entrywise deviation of `ΦΦᵀ` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.gram();
        let m = self.m();
        let mut worst = 0.0f64;
        for j in 0..m {
            for i in 0..m {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// `Φx` for a single length-`p` vector.
    pub fn apply(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.p() {
            return Err(BcrError::DimensionMismatch {
                what: "vector length vs projection p",
                expected: self.p(),
                found: x.len(),
            });
        }
        Ok(DVector::from_iterator(
            self.m(),
            (0..self.m()).map(|i| dot(self.row(i), x)),
        ))
    }

    /// `Φᵀβ`, mapping compressed coefficients back to predictor space.
    pub fn lift(&self, beta: &[f64]) -> DVector<f64> {
        assert_eq!(beta.len(), self.m());
        let mut out = DVector::zeros(self.p());
        for (i, &b) in beta.iter().enumerate() {
            axpy(b, self.row(i), out.as_mut_slice());
        }
        out
    }

    /// `XΦᵀ` for an `n × p` design; row `i` of the result is `(Φx_i)ᵀ`.
    pub fn compress(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        compress(self, x)
    }
}

/// `Z = XΦᵀ`
pub fn compress(phi: &ProjectionMatrix, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != phi.p() {
        return Err(BcrError::DimensionMismatch {
            what: "design columns vs projection p",
            expected: phi.p(),
            found: x.ncols(),
        });
    }
    Ok(x * &phi.basis)
}
