mod common;

use hahnbound_core::arith::{int, rational_to_f64, Rational};
use hahnbound_core::bound::{theorem_bound, BoundParams};
use hahnbound_core::distributions::{
    brute_force_distance, is_k_delta_indistinguishable, is_k_delta_indistinguishable_brute_force, make_parity_pair,
    stat_distance_t,
};
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn kernel_distance_equals_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for n in 1..=8 {
        for _ in 0..12 {
            let mu = common::random_distribution(&mut rng, n);
            let nu = common::random_distribution(&mut rng, n);
            for t in 0..=n {
                assert_eq!(stat_distance_t(&mu, &nu, t).unwrap(), brute_force_distance(&mu, &nu, t).unwrap());
            }
        }
    }
}

#[test]
fn distance_monotone_symmetric_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 1..=20 {
        let mu = common::random_distribution(&mut rng, n);
        let nu = common::random_distribution(&mut rng, n);
        let mut prev = Rational::zero();
        for t in 0..=n {
            let d = stat_distance_t(&mu, &nu, t).unwrap();
            assert_eq!(d, stat_distance_t(&nu, &mu, t).unwrap());
            assert!(d >= prev && d <= Rational::one());
            prev = d;
        }
        let f = stat_distance_t(&mu.to_f64(), &nu.to_f64(), n).unwrap();
        assert!((f - rational_to_f64(&prev)).abs() < 1e-12);
    }
}

#[test]
fn parity_pairs_through_both_paths() {
    for n in 1..=10 {
        let (mu, nu) = make_parity_pair(n).unwrap();
        let fast = is_k_delta_indistinguishable(&mu, &nu, n - 1, &int(0)).unwrap();
        let slow = is_k_delta_indistinguishable_brute_force(&mu, &nu, n - 1, &int(0)).unwrap();
        assert!(fast.holds && slow.holds);
        assert_eq!(stat_distance_t(&mu, &nu, n).unwrap(), int(1));
        assert_eq!(brute_force_distance(&mu, &nu, n).unwrap(), int(1));
    }
}

#[test]
fn indistinguishable_pairs_respect_bound() {
    // every random pair is (k, Delta_k)-wise indistinguishable for its own Delta_k
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for n in 3..=14 {
        for _ in 0..4 {
            let mu = common::random_distribution(&mut rng, n);
            let nu = common::random_distribution(&mut rng, n);
            for t in 1..n {
                let dt = rational_to_f64(&stat_distance_t(&mu, &nu, t).unwrap());
                for k in 0..t {
                    let delta = rational_to_f64(&stat_distance_t(&mu, &nu, k).unwrap());
                    for s in 0..=k {
                        let b = theorem_bound(&BoundParams::new(n, t, k, s, delta).unwrap()).unwrap();
                        assert!(dt <= b.raw() + 1e-12, "n={n} t={t} k={k} s={s}");
                    }
                }
            }
        }
    }
}
