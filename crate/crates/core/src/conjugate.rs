//! Exact conjugate inference for one compressed regression
//! `y = Zβ + ε`, `ε ~ N(0, σ²I)`, with `β | σ² ~ N(0, σ²Σ_β)` and the
//! Jeffreys scale prior `π(σ²) ∝ 1/σ²`.
//!
//! With `A = ZᵀZ + Σ_β⁻¹` the posterior is
//!
//! ```text
//! μ  = A⁻¹Zᵀy
//! a₁ = n/2
//! b₁ = (yᵀy − yᵀZA⁻¹Zᵀy) / 2
//! β | y  ~ t_n(μ, (2b₁/n)A⁻¹)
//! σ² | y ~ IG(a₁, b₁)
//! ```
//!
//! and the marginal likelihood needs only m×m work because
//! `|ZΣ_βZᵀ + I| = |A|·|Σ_β|` and `yᵀ(ZΣ_βZᵀ + I)⁻¹y = 2b₁`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{BcrError, Result};
use crate::linalg::Cholesky;
use crate::special::{beta_reg_split, log_gamma};

/// Relative floor on `b₁` below which the posterior is declared degenerate.
pub const B1_FLOOR: f64 = 1e-12;

/// Diagonal prior scale `Σ_β` for the compressed coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    sigma_beta_diag: Vec<f64>,
}

impl PriorSpec {
    pub fn new(sigma_beta_diag: Vec<f64>) -> Result<Self> {
        if sigma_beta_diag.is_empty() {
            return Err(BcrError::InvalidPrior("empty diagonal".into()));
        }
        if let Some(bad) = sigma_beta_diag.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(BcrError::InvalidPrior(format!(
                "diagonal entries must be positive and finite, got {bad}"
            )));
        }
        Ok(Self { sigma_beta_diag })
    }

    /// `Σ_β = I_m`
    pub fn identity(m: usize) -> Self {
        Self {
            sigma_beta_diag: vec![1.0; m],
        }
    }

    /// `Σ_β = v·I_m`
    pub fn isotropic(m: usize, variance: f64) -> Result<Self> {
        Self::new(vec![variance; m])
    }

    pub fn dim(&self) -> usize {
        self.sigma_beta_diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.sigma_beta_diag
    }

    /// `log |Σ_β|`
    pub fn log_det(&self) -> f64 {
        self.sigma_beta_diag.iter().map(|v| v.ln()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedPosterior {
    mu: DVector<f64>,
    chol_a: Cholesky,
    a1: f64,
    b1: f64,
    n: usize,
    log_marginal: f64,
}

/// Location-scale Student-t law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudentT {
    pub loc: f64,
    pub scale2: f64,
    pub dof: f64,
}

fn check_inputs(z: &DMatrix<f64>, y: &DVector<f64>, prior: &PriorSpec) -> Result<()> {
    if z.nrows() != y.len() {
        return Err(BcrError::DimensionMismatch {
            what: "compressed design rows vs response length",
            expected: y.len(),
            found: z.nrows(),
        });
    }
    if z.ncols() != prior.dim() {
        return Err(BcrError::DimensionMismatch {
            what: "compressed design columns vs prior dimension",
            expected: prior.dim(),
            found: z.ncols(),
        });
    }
    if y.is_empty() || z.ncols() == 0 {
        return Err(BcrError::InvalidData("empty compressed design".into()));
    }
    Ok(())
}

/// Fits the compressed posterior and caches its log marginal likelihood.
pub fn fit_posterior(
    z: &DMatrix<f64>,
    y: &DVector<f64>,
    prior: &PriorSpec,
) -> Result<CompressedPosterior> {
    check_inputs(z, y, prior)?;
    let n = y.len();

    let mut a = z.tr_mul(z);
    for (i, v) in prior.diag().iter().enumerate() {
        a[(i, i)] += 1.0 / v;
    }
    let chol_a = Cholesky::factor(&a)?;
    let zty = z.tr_mul(y);
    let mu = chol_a.solve(zty.as_slice());

    let yty = y.norm_squared();
    let b1 = 0.5 * (yty - zty.dot(&mu));
    if !(b1 > B1_FLOOR * yty) {
        return Err(BcrError::NonPositiveB1 { b1, yty });
    }

    let nf = n as f64;
    let log_det = chol_a.log_det() + prior.log_det();
    let log_marginal = -0.5 * log_det + 0.5 * nf * 2f64.ln() + log_gamma(0.5 * nf)
        - 0.5 * nf * (2.0 * b1).ln()
        - 0.5 * nf * (2.0 * PI).ln();

    Ok(CompressedPosterior {
        mu,
        chol_a,
        a1: 0.5 * nf,
        b1,
        n,
        log_marginal,
    })
}

/// `log P(y | Z)` evaluated in m-space.
pub fn log_marginal(z: &DMatrix<f64>, y: &DVector<f64>, prior: &PriorSpec) -> Result<f64> {
    fit_posterior(z, y, prior).map(|post| post.log_marginal)
}

/// Student-t predictive for a compressed covariate `z_new = Φx_new`.
pub fn predictive(post: &CompressedPosterior, z_new: &[f64]) -> StudentT {
    assert_eq!(z_new.len(), post.dim(), "compressed covariate length");
    let loc = post.mu.as_slice().iter().zip(z_new).map(|(a, b)| a * b).sum();
    let scale2 = post.noise_scale2() * (1.0 + post.chol_a.inv_quad(z_new));
    StudentT {
        loc,
        scale2,
        dof: post.n as f64,
    }
}

/// CDF of a location-scale Student-t.
pub fn student_t_cdf(t: &StudentT, x: f64) -> f64 {
    t.cdf(x)
}

impl CompressedPosterior {
    /// Rebuilds a posterior from stored parts, checking its invariants.
    pub fn from_parts(
        mu: Vec<f64>,
        chol_a: DMatrix<f64>,
        b1: f64,
        n: usize,
        log_marginal: f64,
    ) -> Result<Self> {
        let chol_a = Cholesky::from_factor(chol_a)?;
        if mu.len() != chol_a.dim() {
            return Err(BcrError::DimensionMismatch {
                what: "posterior mean vs factor dimension",
                expected: chol_a.dim(),
                found: mu.len(),
            });
        }
        if !(b1 > 0.0) || n == 0 {
            return Err(BcrError::NonPositiveB1 { b1, yty: f64::NAN });
        }
        Ok(Self {
            mu: DVector::from_vec(mu),
            chol_a,
            a1: 0.5 * n as f64,
            b1,
            n,
            log_marginal,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    /// Lower Cholesky factor of `A = ZᵀZ + Σ_β⁻¹`.
    pub fn chol_a(&self) -> &DMatrix<f64> {
        self.chol_a.factor_matrix()
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_marginal(&self) -> f64 {
        self.log_marginal
    }

    /// `2b₁/n`, the squared scale shared by the coefficient and predictive laws.
    pub fn noise_scale2(&self) -> f64 {
        2.0 * self.b1 / self.n as f64
    }

    /// `A`, reconstructed from its factor.
    pub fn precision(&self) -> DMatrix<f64> {
        self.chol_a.reconstruct()
    }

    /// Scale matrix `Σ = (2b₁/n)A⁻¹` of the coefficient posterior.
    pub fn scale_matrix(&self) -> DMatrix<f64> {
        let m = self.dim();
        let mut out = DMatrix::zeros(m, m);
        let mut e = vec![0.0; m];
        for j in 0..m {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.chol_a.solve(&e);
            out.set_column(j, &(col * self.noise_scale2()));
        }
        out
    }

    /// `zᵀA⁻¹z`
    pub fn inv_quad(&self, z: &[f64]) -> f64 {
        self.chol_a.inv_quad(z)
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> DVector<f64> {
        self.chol_a.solve(b)
    }

    /// Solves `L w = b` for the lower factor of `A`.
    pub fn solve_lower(&self, b: &[f64]) -> DVector<f64> {
        self.chol_a.solve_lower(b)
    }
}

impl StudentT {
    pub fn new(loc: f64, scale2: f64, dof: f64) -> Result<Self> {
        if !(scale2 > 0.0 && dof > 0.0) || !loc.is_finite() || !scale2.is_finite() {
            return Err(BcrError::InvalidConfig(format!(
                "student-t needs finite loc and positive scale2/dof (loc = {loc}, scale2 = {scale2}, dof = {dof})"
            )));
        }
        Ok(Self { loc, scale2, dof })
    }

    pub fn scale(&self) -> f64 {
        self.scale2.sqrt()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let nu = self.dof;
        let r2 = (x - self.loc).powi(2) / self.scale2;
        log_gamma(0.5 * (nu + 1.0)) - log_gamma(0.5 * nu)
            - 0.5 * (nu * PI * self.scale2).ln()
            - 0.5 * (nu + 1.0) * (r2 / nu).ln_1p()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// `P(Y ≤ x)` via `I_{ν/(ν+t²)}(ν/2, 1/2)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let t = (x - self.loc) / self.scale();
        if t.is_nan() {
            return f64::NAN;
        }
        if t.is_infinite() {
            return if t > 0.0 { 1.0 } else { 0.0 };
        }
        let nu = self.dof;
        let t2 = t * t;
        let denom = nu + t2;
        let tail = 0.5 * beta_reg_split(0.5 * nu, 0.5, nu / denom, t2 / denom);
        if t > 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }

    /// Quantile by bisection on [`StudentT::cdf`].
    pub fn quantile(&self, prob: f64) -> f64 {
        assert!(prob > 0.0 && prob < 1.0, "quantile level must be in (0, 1)");
        if prob == 0.5 {
            return self.loc;
        }
        let s = self.scale();
        let mut width = s;
        let (mut lo, mut hi) = if prob > 0.5 {
            (self.loc, self.loc + width)
        } else {
            (self.loc - width, self.loc)
        };
        while self.cdf(lo) > prob {
            width *= 2.0;
            lo = self.loc - width;
        }
        while self.cdf(hi) < prob {
            width *= 2.0;
            hi = self.loc + width;
        }
        let tol = 1e-12 * (1.0 + s);
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
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_design_gives_prior_centered_posterior() {
        let z = DMatrix::<f64>::zeros(4, 2);
        let y = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let post = fit_posterior(&z, &y, &PriorSpec::identity(2)).unwrap();
        assert_eq!(post.mu().as_slice(), &[0.0, 0.0]);
        assert!((post.b1() - y.norm_squared() / 2.0).abs() < 1e-15);
        assert_eq!(post.a1(), 2.0);
    }

    #[test]
    fn scalar_closed_form() {
        // A = 1 + 1 = 2, mu = 2/2 = 1, b1 = (4 − 2·(1/2)·2)/2 = 1
        let z = DMatrix::from_element(1, 1, 1.0);
        let y = DVector::from_element(1, 2.0);
        let post = fit_posterior(&z, &y, &PriorSpec::identity(1)).unwrap();
        assert!((post.precision()[(0, 0)] - 2.0).abs() < 1e-15);
        assert!((post.mu()[0] - 1.0).abs() < 1e-15);
        assert!((post.b1() - 1.0).abs() < 1e-15);
        assert_eq!(post.a1(), 0.5);
    }

    #[test]
    fn zero_design_log_marginal_closed_form() {
        let z = DMatrix::<f64>::zeros(4, 2);
        let y = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let yty: f64 = y.norm_squared();
        let expected = 2.0 * 2f64.ln() + 0.0 - 2.0 * yty.ln() - 2.0 * (2.0 * PI).ln();
        let v = log_marginal(&z, &y, &PriorSpec::identity(2)).unwrap();
        assert!((v - expected).abs() < 1e-12);
        // scaling Σ_β leaves the zero-design value unchanged
        let scaled = log_marginal(&z, &y, &PriorSpec::isotropic(2, 7.5).unwrap()).unwrap();
        assert!((scaled - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_covariate_predictive() {
        let z = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, -1.0]);
        let y = DVector::from_vec(vec![0.5, 2.5, -0.25]);
        let post = fit_posterior(&z, &y, &PriorSpec::identity(1)).unwrap();
        let t = predictive(&post, &[0.0]);
        assert_eq!(t.loc, 0.0);
        assert!((t.scale2 - 2.0 * post.b1() / 3.0).abs() < 1e-15);
        assert_eq!(t.dof, 3.0);
    }

    #[test]
    fn response_in_span_is_degenerate() {
        // y exactly explained with Σ_β → huge: b1 tiny relative to y'y
        let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let y = DVector::from_vec(vec![3.0, -4.0]);
        let prior = PriorSpec::isotropic(2, 1e30).unwrap();
        assert!(matches!(
            fit_posterior(&z, &y, &prior),
            Err(BcrError::NonPositiveB1 { .. })
        ));
        let zero = DVector::from_vec(vec![0.0, 0.0]);
        assert!(fit_posterior(&z, &zero, &PriorSpec::identity(2)).is_err());
    }

    #[test]
    fn nan_input_fails_cholesky() {
        let z = DMatrix::from_row_slice(2, 1, &[f64::NAN, 1.0]);
        let y = DVector::from_vec(vec![1.0, 2.0]);
        assert!(matches!(
            fit_posterior(&z, &y, &PriorSpec::identity(1)),
            Err(BcrError::CholeskyFailure { .. })
        ));
    }

    #[test]
    fn dimension_checks() {
        let z = DMatrix::<f64>::zeros(3, 2);
        let y = DVector::from_vec(vec![1.0, 2.0]);
        assert!(fit_posterior(&z, &y, &PriorSpec::identity(2)).is_err());
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(fit_posterior(&z, &y, &PriorSpec::identity(3)).is_err());
        assert!(PriorSpec::new(vec![1.0, 0.0]).is_err());
        assert!(PriorSpec::new(vec![]).is_err());
    }

    #[test]
    fn t_cdf_reference_points() {
        let t = StudentT::new(1.5, 4.0, 3.0).unwrap();
        assert_eq!(t.cdf(1.5), 0.5);
        // Cauchy: F(1) = 1/2 + atan(1)/π = 0.75
        let c = StudentT::new(0.0, 1.0, 1.0).unwrap();
        let oracle = 0.5 + 1f64.atan() / PI;
        assert!((c.cdf(1.0) - oracle).abs() < 1e-14);
        assert!((c.cdf(-3.0) - (0.5 + (-3f64).atan() / PI)).abs() < 1e-14);
    }

    #[test]
    fn t_cdf_matches_statrs() {
        use statrs::distribution::{ContinuousCDF, StudentsT};
        for &(nu, x) in &[(2.0, -1.3), (5.0, 0.2), (30.0, 2.5), (70.0, -1.96), (110.0, 4.0)] {
            let ours = StudentT::new(0.0, 1.0, nu).unwrap().cdf(x);
            let r = StudentsT::new(0.0, 1.0, nu).unwrap().cdf(x);
            assert!((ours - r).abs() < 1e-12, "nu={nu} x={x}");
        }
    }

    #[test]
    fn t_quantile_inverts_cdf() {
        let t = StudentT::new(-2.0, 0.3, 12.0).unwrap();
        for &p in &[0.01, 0.2, 0.5, 0.975] {
            let q = t.quantile(p);
            assert!((t.cdf(q) - p).abs() < 1e-11, "p={p}");
        }
    }
}
