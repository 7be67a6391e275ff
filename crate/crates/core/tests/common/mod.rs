#![allow(dead_code)]

use hahnbound_core::arith::{int, rat, Rational};
use hahnbound_core::SymmetricDistribution;
use num_traits::Zero;
use rand::Rng;

/// Random weight vector on `{0..n}` with small denominators and some zeros.
pub fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    let mut w: Vec<Rational> = (0..=n)
        .map(|_| if rng.gen_bool(0.3) { int(0) } else { int(rng.gen_range(1..=30)) })
        .collect();
    if w.iter().all(Zero::is_zero) {
        w[rng.gen_range(0..=n)] = int(1);
    }
    let total: Rational = w.iter().sum();
    w.into_iter().map(|v| v / &total).collect()
}

pub fn random_distribution<R: Rng>(rng: &mut R, n: usize) -> SymmetricDistribution {
    SymmetricDistribution::new(random_weights(rng, n)).unwrap()
}

/// Test function with values in `[-1, 1]`: either independent signs or
/// independent rationals `p/q`.
pub fn random_test<R: Rng>(rng: &mut R, len: usize) -> Vec<Rational> {
    if rng.gen_bool(0.5) {
        (0..len).map(|_| if rng.gen_bool(0.5) { int(1) } else { int(-1) }).collect()
    } else {
        (0..len)
            .map(|_| {
                let q = rng.gen_range(1..=64i64);
                rat(rng.gen_range(-q..=q), q)
            })
            .collect()
    }
}
