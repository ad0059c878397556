mod oracle;

use bcr_core::projection::{draw_raw_rows, EntryLaw};
use bcr_core::{compress, draw_projection, DMatrix, ProjectionSpec};
use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Counts of (−√(1/ψ), 0, +√(1/ψ)) over the raw rows of a spec.
fn raw_counts(spec: &ProjectionSpec) -> [u64; 3] {
    let raw = draw_raw_rows(spec).unwrap();
    let mag = (1.0 / spec.psi).sqrt();
    let mut counts = [0u64; 3];
    for v in raw.iter() {
        let k = if *v == -mag {
            0
        } else if *v == 0.0 {
            1
        } else {
            assert_eq!(*v, mag, "value outside the support");
            2
        };
        counts[k] += 1;
    }
    counts
}

fn expected_probs(psi: f64) -> [f64; 3] {
    [psi * psi, 2.0 * psi * (1.0 - psi), (1.0 - psi) * (1.0 - psi)]
}

#[test]
fn raw_entries_pass_chi_square_at_three_psis() {
    let crit = ChiSquared::new(2.0).unwrap().inverse_cdf(0.999);
    for (k, psi) in [0.2, 0.5, 0.9].into_iter().enumerate() {
        let spec = ProjectionSpec::new(10, 100_000, psi, 100 + k as u64).unwrap();
        let counts = raw_counts(&spec);
        let total: u64 = counts.iter().sum();
        assert_eq!(total, 1_000_000);
        let stat: f64 = counts
            .iter()
            .zip(expected_probs(psi))
            .map(|(&o, p)| {
                let e = p * total as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        assert!(stat < crit, "psi={psi}: chi2={stat} >= {crit}");
    }
}

#[test]
fn frequencies_at_half_within_three_binomial_se() {
    let spec = ProjectionSpec::new(4, 250_000, 0.5, 3).unwrap();
    let counts = raw_counts(&spec);
    let total = 1_000_000f64;
    for (o, p) in counts.iter().zip([0.25, 0.5, 0.25]) {
        let se = (p * (1.0 - p) / total).sqrt();
        assert!((*o as f64 / total - p).abs() < 3.0 * se, "{counts:?}");
    }
}

#[test]
fn entry_law_reports_printed_probabilities() {
    for psi in [0.15, 0.5, 0.77] {
        let law = EntryLaw::new(psi);
        let p = law.probabilities();
        for (a, b) in p.iter().zip(expected_probs(psi)) {
            assert!((a - b).abs() < 1e-15);
        }
        let s = law.support();
        assert_eq!(s[1], 0.0);
        assert!((s[2] - (1.0 / psi).sqrt()).abs() < 1e-15);
        assert_eq!(s[0], -s[2]);
    }
}

#[test]
fn small_spec_is_orthonormal_and_contracting() {
    let spec = ProjectionSpec::new(3, 8, 0.5, 7).unwrap();
    let phi = draw_projection(&spec).unwrap();
    assert!(phi.orthonormality_error() < 1e-10);
    let mut r = oracle::rng(1);
    for _ in 0..1000 {
        let x = oracle::normal_vector(&mut r, 8);
        let z = phi.apply(x.as_slice()).unwrap();
        assert!(z.norm() <= x.norm() * (1.0 + 1e-10));
    }
}

#[test]
fn same_spec_same_matrix() {
    let spec = ProjectionSpec::new(20, 500, 0.33, 99).unwrap();
    let a = draw_projection(&spec).unwrap();
    let b = draw_projection(&spec).unwrap();
    assert_eq!(a.to_matrix(), b.to_matrix());
    let other = draw_projection(&ProjectionSpec { seed: 100, ..spec }).unwrap();
    assert_ne!(a.to_matrix(), other.to_matrix());
}

#[test]
fn compress_matches_scalar_loop() {
    let spec = ProjectionSpec::new(2, 8, 0.4, 11).unwrap();
    let phi = draw_projection(&spec).unwrap();
    let mut r = oracle::rng(2);
    let x = oracle::normal_matrix(&mut r, 5, 8);
    let z = compress(&phi, &x).unwrap();
    assert_eq!(z.shape(), (5, 2));
    for i in 0..5 {
        for j in 0..2 {
            let mut s = 0.0;
            for k in 0..8 {
                s += x[(i, k)] * phi.row(j)[k];
            }
            assert!((z[(i, j)] - s).abs() < 1e-12);
        }
    }
}

#[test]
fn compress_identity_and_zero_designs() {
    let spec = ProjectionSpec::new(3, 6, 0.6, 5).unwrap();
    let phi = draw_projection(&spec).unwrap();
    let z = compress(&phi, &DMatrix::identity(6, 6)).unwrap();
    assert_eq!(z, phi.to_matrix().transpose());
    let z0 = compress(&phi, &DMatrix::zeros(4, 6)).unwrap();
    assert!(z0.iter().all(|v| *v == 0.0));
    assert!(compress(&phi, &DMatrix::zeros(4, 5)).is_err());
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(ProjectionSpec::new(0, 5, 0.5, 0).is_err());
    assert!(ProjectionSpec::new(6, 5, 0.5, 0).is_err());
    assert!(ProjectionSpec::new(2, 5, 0.1, 0).is_err());
    assert!(ProjectionSpec::new(2, 5, 1.0, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_specs_hold_invariants(
        p in 1usize..120,
        frac in 0.0f64..1.0,
        psi in 0.1001f64..0.95,
        seed in any::<u64>(),
    ) {
        let m = 1 + ((p - 1) as f64 * frac) as usize;
        let spec = ProjectionSpec::new(m, p, psi, seed).unwrap();
        let phi = draw_projection(&spec).unwrap();
        prop_assert!(phi.orthonormality_error() < 1e-10);
        let mut r = oracle::rng(seed);
        for _ in 0..20 {
            let x: Vec<f64> = (0..p).map(|_| r.random_range(-3.0..3.0)).collect();
            let zn = phi.apply(&x).unwrap().norm();
            let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(zn <= xn * (1.0 + 1e-10) + 1e-300);
        }
    }
}
