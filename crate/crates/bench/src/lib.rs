//! Shared fixtures for the benchmarks.

use bcr_core::simbench::{gen_design, gen_response};
use bcr_core::{standardize, Dataset};

/// Standardized AR(1) design with five active predictors.
pub fn fixture(n: usize, p: usize, seed: u64) -> Dataset {
    let x = gen_design(n, p, 0.5, seed);
    let beta: Vec<f64> = (0..p).map(|j| if j < 5 { 1.0 } else { 0.0 }).collect();
    let y = gen_response(&x, &beta, 1.0, seed.wrapping_add(1)).expect("shapes agree");
    standardize(&Dataset::new(x, y).expect("shapes agree")).0
}
