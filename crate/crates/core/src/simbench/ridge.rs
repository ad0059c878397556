//! Closed-form ridge regression baseline.
//!
//! The penalty is picked from a fixed grid by exact leave-one-out error,
//! computed for every grid point from one eigendecomposition of the
//! smaller Gram matrix (`XᵀX` or `XXᵀ`). Intervals are normal plug-in
//! intervals centered at the prediction, with the sample variance of the
//! training residuals.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::data::{standardize, Dataset};
use crate::ensemble::PointPrediction;
use crate::error::{BcrError, Result};
use crate::special::normal_quantile;

/// `{10^k : k = −4, −3.5, …, 4}`
pub fn ridge_grid() -> Vec<f64> {
    (-8..=8).map(|h| 10f64.powf(f64::from(h) * 0.5)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    pub lambda: f64,
    pub coef: DVector<f64>,
    /// Sample variance of the training residuals at the chosen penalty.
    pub sigma2: f64,
    /// Mean squared leave-one-out error for each grid point.
    pub loo_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeOutput {
    pub fit: RidgeFit,
    pub predictions: Vec<PointPrediction>,
}

/// Spectral form of the hat matrix, shared by every penalty.
struct Spectrum {
    /// Eigenvalues of the Gram matrix.
    d: Vec<f64>,
    /// `n × k` left factor: `XV` (primal) or `W` (dual).
    u: DMatrix<f64>,
    /// `k × n` right factor transposed onto `y`: `Uᵀy`.
    uty: DVector<f64>,
    primal: bool,
    v: Option<DMatrix<f64>>,
}

impl Spectrum {
    fn new(x: &DMatrix<f64>, y: &DVector<f64>) -> Self {
        let (n, p) = x.shape();
        if p <= n {
            let eig = SymmetricEigen::new(x.tr_mul(x));
            let u = x * &eig.eigenvectors;
            let uty = u.tr_mul(y);
            Self {
                d: eig.eigenvalues.iter().map(|v| v.max(0.0)).collect(),
                u,
                uty,
                primal: true,
                v: Some(eig.eigenvectors),
            }
        } else {
            let eig = SymmetricEigen::new(x * x.transpose());
            let uty = eig.eigenvectors.tr_mul(y);
            Self {
                d: eig.eigenvalues.iter().map(|v| v.max(0.0)).collect(),
                u: eig.eigenvectors,
                uty,
                primal: false,
                v: None,
            }
        }
    }

    /// Shrinkage applied to `uᵢuᵢᵀ` in the hat matrix.
    fn hat_factor(&self, k: usize, lambda: f64) -> f64 {
        if self.primal {
            1.0 / (self.d[k] + lambda)
        } else {
            self.d[k] / (self.d[k] + lambda)
        }
    }

    /// Fitted values and hat diagonal. The diagonal includes the `1/n`
    /// leverage of the intercept that centering stands in for.
    fn fitted(&self, lambda: f64) -> (DVector<f64>, Vec<f64>) {
        let n = self.u.nrows();
        let k = self.d.len();
        let coef: DVector<f64> = DVector::from_fn(k, |i, _| self.hat_factor(i, lambda) * self.uty[i]);
        let fitted = &self.u * coef;
        let hat = (0..n)
            .map(|i| {
                1.0 / n as f64
                    + (0..k)
                        .map(|c| self.u[(i, c)].powi(2) * self.hat_factor(c, lambda))
                        .sum::<f64>()
            })
            .collect();
        (fitted, hat)
    }

    fn coefficients(&self, x: &DMatrix<f64>, lambda: f64) -> DVector<f64> {
        let k = self.d.len();
        let scaled = DVector::from_fn(k, |i, _| self.uty[i] / (self.d[i] + lambda));
        match &self.v {
            Some(v) => v * scaled,
            None => x.tr_mul(&(&self.u * scaled)),
        }
    }
}

/// Fits ridge on a standardized design and centered response. Leave-one-out
/// errors treat the centering as an unpenalized intercept.
pub fn ridge_fit(x: &DMatrix<f64>, y: &DVector<f64>, grid: &[f64]) -> Result<RidgeFit> {
    if x.nrows() != y.len() {
        return Err(BcrError::DimensionMismatch {
            what: "design rows vs response length",
            expected: y.len(),
            found: x.nrows(),
        });
    }
    if grid.is_empty() || grid.iter().any(|l| !(*l > 0.0)) {
        return Err(BcrError::InvalidConfig("ridge grid must hold positive penalties".into()));
    }
    let n = y.len();
    let spec = Spectrum::new(x, y);
    let loo_errors: Vec<f64> = grid
        .iter()
        .map(|&lambda| {
            let (fitted, hat) = spec.fitted(lambda);
            (0..n)
                .map(|i| ((y[i] - fitted[i]) / (1.0 - hat[i])).powi(2))
                .sum::<f64>()
                / n as f64
        })
        .collect();
    let best = loo_errors
        .iter()
        .enumerate()
        .fold(0, |best, (i, e)| if *e < loo_errors[best] { i } else { best });
    let lambda = grid[best];
    let (fitted, _) = spec.fitted(lambda);
    let resid = y - &fitted;
    let mean = resid.mean();
    let sigma2 = resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(RidgeFit {
        lambda,
        coef: spec.coefficients(x, lambda),
        sigma2,
        loo_errors,
    })
}

/// Standardizes `train`, fits ridge, and predicts the raw rows of `test_x`
/// on the response scale with normal plug-in intervals at `level`.
pub fn ridge_fit_predict(
    train: &Dataset,
    test_x: &DMatrix<f64>,
    grid: &[f64],
    level: f64,
) -> Result<RidgeOutput> {
    if !(level > 0.0 && level < 1.0) {
        return Err(BcrError::InvalidConfig(format!("interval level {level} outside (0, 1)")));
    }
    let (std_train, stats) = standardize(train);
    let fit = ridge_fit(&std_train.x, &std_train.y, grid)?;
    let xt = stats.transform_matrix(test_x)?;
    let half = normal_quantile(0.5 * (1.0 + level)) * fit.sigma2.sqrt();
    let predictions = (&xt * &fit.coef)
        .iter()
        .map(|m| {
            let mean = stats.uncenter(*m);
            PointPrediction {
                mean,
                lo: mean - half,
                hi: mean + half,
            }
        })
        .collect();
    Ok(RidgeOutput { fit, predictions })
}
