//! Small dense kernels: unrolled dot/axpy and a Cholesky factorization
//! for the m×m systems that appear in every compressed posterior.

use nalgebra::{DMatrix, DVector};

use crate::error::{BcrError, Result};

/// Dot product with four independent accumulators.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    /// Pivots below `1e-12 · mean(diag(A))` are rejected.
    pub fn factor(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(BcrError::DimensionMismatch {
                what: "cholesky input columns",
                expected: n,
                found: a.ncols(),
            });
        }
        let mean_diag = if n == 0 { 0.0 } else { a.diagonal().sum() / n as f64 };
        if !mean_diag.is_finite() {
            return Err(BcrError::CholeskyFailure { pivot: 0 });
        }
        let floor = 1e-12 * mean_diag;
        let mut l = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > floor) || !d.is_finite() {
                return Err(BcrError::CholeskyFailure { pivot: j });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    /// Wraps an existing factor, checking shape and a positive diagonal.
    pub fn from_factor(l: DMatrix<f64>) -> Result<Self> {
        if l.nrows() != l.ncols() {
            return Err(BcrError::DimensionMismatch {
                what: "cholesky factor columns",
                expected: l.nrows(),
                found: l.ncols(),
            });
        }
        if let Some(pivot) = (0..l.nrows()).find(|&i| !(l[(i, i)] > 0.0)) {
            return Err(BcrError::CholeskyFailure { pivot });
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn factor_matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// Solves `L w = b`.
    pub fn solve_lower(&self, b: &[f64]) -> DVector<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut w = DVector::from_column_slice(b);
        for i in 0..n {
            let mut s = w[i];
            for k in 0..i {
                s -= self.l[(i, k)] * w[k];
            }
            w[i] = s / self.l[(i, i)];
        }
        w
    }

    /// Solves `Lᵀ x = w` in place.
    fn solve_upper_in_place(&self, w: &mut DVector<f64>) {
        let n = self.dim();
        for i in (0..n).rev() {
            let mut s = w[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * w[k];
            }
            w[i] = s / self.l[(i, i)];
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> DVector<f64> {
        let mut w = self.solve_lower(b);
        self.solve_upper_in_place(&mut w);
        w
    }

    /// `log |A|`
    pub fn log_det(&self) -> f64 {
        2.0 * self.l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// `bᵀ A⁻¹ b = ‖L⁻¹ b‖²`
    pub fn inv_quad(&self, b: &[f64]) -> f64 {
        self.solve_lower(b).norm_squared()
    }

    /// Reconstructs `A = L Lᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.l * self.l.transpose()
    }
}
