use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{BcrError, Result};
use crate::rng;

/// `n × p` Gaussian design with `cor(x_j, x_k) = ρ^|j−k|`, built row by row
/// with the AR(1) recursion `x_j = ρ x_{j−1} + √(1−ρ²) ε_j`.
pub fn gen_design(n: usize, p: usize, rho: f64, seed: u64) -> DMatrix<f64> {
    assert!(rho.abs() < 1.0, "|rho| must be < 1");
    let innov = (1.0 - rho * rho).sqrt();
    let mut x = DMatrix::<f64>::zeros(n, p);
    let mut row = vec![0.0; p];
    for i in 0..n {
        let mut r = rng::substream(seed, &[i as u64]);
        let mut prev: f64 = StandardNormal.sample(&mut r);
        row[0] = prev;
        for v in row.iter_mut().skip(1) {
            let e: f64 = StandardNormal.sample(&mut r);
            prev = rho * prev + innov * e;
            *v = prev;
        }
        for (j, v) in row.iter().enumerate() {
            x[(i, j)] = *v;
        }
    }
    x
}

/// `y = Xβ₀ + σz` with `z` supplied.
pub fn gen_response_with_noise(
    x: &DMatrix<f64>,
    beta0: &[f64],
    sigma2: f64,
    z: &DVector<f64>,
) -> Result<DVector<f64>> {
    if beta0.len() != x.ncols() {
        return Err(BcrError::DimensionMismatch {
            what: "coefficients vs design columns",
            expected: x.ncols(),
            found: beta0.len(),
        });
    }
    if z.len() != x.nrows() {
        return Err(BcrError::DimensionMismatch {
            what: "noise vs design rows",
            expected: x.nrows(),
            found: z.len(),
        });
    }
    let beta = DVector::from_column_slice(beta0);
    Ok(x * beta + z * sigma2.sqrt())
}

/// `y = Xβ₀ + ε`, `ε ~ N(0, σ²I)`.
pub fn gen_response(x: &DMatrix<f64>, beta0: &[f64], sigma2: f64, seed: u64) -> Result<DVector<f64>> {
    let mut r = rng::stream(seed);
    let z = DVector::from_fn(x.nrows(), |_, _| StandardNormal.sample(&mut r));
    gen_response_with_noise(x, beta0, sigma2, &z)
}
