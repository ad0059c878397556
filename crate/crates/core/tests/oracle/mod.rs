//! Independent reference computations for the integration and acceptance
//! tests. Nothing here calls into the library's linear algebra or special
//! functions: inverses and determinants come from plain Gauss-Jordan
//! elimination and distributions from statrs / rand_distr.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn normal_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(r))
}

pub fn normal_vector(r: &mut impl Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| StandardNormal.sample(r))
}

/// Inverse and log|det| by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan(a: &DMatrix<f64>) -> (Vec<Vec<f64>>, f64) {
    let n = a.nrows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| a[(i, j)]).collect();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    let mut log_det = 0.0;
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(c, piv);
        let d = m[c][c];
        assert!(d != 0.0, "singular matrix in oracle");
        log_det += d.abs().ln();
        for v in m[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
    }
    let inv = m.into_iter().map(|row| row[n..].to_vec()).collect();
    (inv, log_det)
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Log marginal likelihood evaluated directly in n-space:
/// `M = Z Σ_β Zᵀ + I`, `log P = −½log|M| + (n/2)log 2 + logΓ(n/2)
/// − (n/2)log(yᵀM⁻¹y) − (n/2)log(2π)`.
pub fn nspace_log_marginal(z: &DMatrix<f64>, y: &DVector<f64>, sigma_beta: &[f64]) -> f64 {
    let n = z.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let mut s = if i == j { 1.0 } else { 0.0 };
        for (k, v) in sigma_beta.iter().enumerate() {
            s += z[(i, k)] * v * z[(j, k)];
        }
        s
    });
    let (inv, log_det) = gauss_jordan(&m);
    let ys = y.as_slice();
    let quad = dot(ys, &mat_vec(&inv, ys));
    let nf = n as f64;
    -0.5 * log_det + 0.5 * nf * 2f64.ln() + ln_gamma(0.5 * nf)
        - 0.5 * nf * quad.ln()
        - 0.5 * nf * (2.0 * std::f64::consts::PI).ln()
}

/// Posterior location and `b1` from an explicit inverse of `A`.
pub fn naive_posterior(z: &DMatrix<f64>, y: &DVector<f64>, sigma_beta: &[f64]) -> (Vec<f64>, f64) {
    let m = z.ncols();
    let a = DMatrix::from_fn(m, m, |i, j| {
        let mut s: f64 = (0..z.nrows()).map(|r| z[(r, i)] * z[(r, j)]).sum();
        if i == j {
            s += 1.0 / sigma_beta[i];
        }
        s
    });
    let (inv, _) = gauss_jordan(&a);
    let zty: Vec<f64> = (0..m)
        .map(|k| (0..z.nrows()).map(|r| z[(r, k)] * y[r]).sum())
        .collect();
    let mu = mat_vec(&inv, &zty);
    let yty: f64 = y.iter().map(|v| v * v).sum();
    let b1 = 0.5 * (yty - dot(&zty, &mu));
    (mu, b1)
}

/// Lower Cholesky factor by the textbook triple loop.
pub fn naive_cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][j] = (a[i][i] - s).sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

/// Draws `y* = z·β + σε` under `σ² ~ IG(a1, b1)`, `β ~ N(μ, σ²A⁻¹)`.
pub fn nig_predictive_draws(
    z_design: &DMatrix<f64>,
    y: &DVector<f64>,
    sigma_beta: &[f64],
    z_new: &[f64],
    draws: usize,
    seed: u64,
) -> Vec<f64> {
    let m = z_design.ncols();
    let n = z_design.nrows();
    let a = DMatrix::from_fn(m, m, |i, j| {
        let mut s: f64 = (0..n).map(|r| z_design[(r, i)] * z_design[(r, j)]).sum();
        if i == j {
            s += 1.0 / sigma_beta[i];
        }
        s
    });
    let (a_inv, _) = gauss_jordan(&a);
    let l = naive_cholesky(&a_inv);
    let (mu, b1) = naive_posterior(z_design, y, sigma_beta);
    let a1 = 0.5 * n as f64;
    let gamma = Gamma::new(a1, 1.0 / b1).unwrap();
    let mut r = rng(seed);
    let mut xi = vec![0.0; m];
    (0..draws)
        .map(|_| {
            let sigma2 = 1.0 / gamma.sample(&mut r);
            let sigma = sigma2.sqrt();
            for v in xi.iter_mut() {
                *v = StandardNormal.sample(&mut r);
            }
            let beta: Vec<f64> = (0..m)
                .map(|i| mu[i] + sigma * (0..=i).map(|k| l[i][k] * xi[k]).sum::<f64>())
                .collect();
            let e: f64 = StandardNormal.sample(&mut r);
            dot(z_new, &beta) + sigma * e
        })
        .collect()
}

/// Empirical quantile of sorted draws (nearest rank, interpolated).
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Asymptotic standard error of the sample `q`-quantile:
/// `√(q(1−q)/N) / f(x_q)`.
pub fn quantile_se(q: f64, n: usize, density_at_quantile: f64) -> f64 {
    (q * (1.0 - q) / n as f64).sqrt() / density_at_quantile
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫ f` over the real line through `y = c + s·tan θ`.
pub fn integrate_real_line(f: &dyn Fn(f64) -> f64, center: f64, scale: f64, tol: f64) -> f64 {
    let half = std::f64::consts::FRAC_PI_2;
    let g = |t: f64| {
        let c = t.cos();
        if c <= 0.0 {
            return 0.0;
        }
        f(center + scale * t.tan()) * scale / (c * c)
    };
    // split so the recursion sees the peak
    adaptive_simpson(&g, -half, 0.0, 0.5 * tol) + adaptive_simpson(&g, 0.0, half, 0.5 * tol)
}

/// Random compressed regression instance with a diagonal prior.
pub struct Instance {
    pub z: DMatrix<f64>,
    pub y: DVector<f64>,
    pub sigma_beta: Vec<f64>,
}

pub fn random_instance(r: &mut impl Rng, n: usize, m: usize) -> Instance {
    let z = normal_matrix(r, n, m);
    let y = normal_vector(r, n);
    let sigma_beta = (0..m).map(|_| r.random_range(0.2..5.0)).collect();
    Instance { z, y, sigma_beta }
}
