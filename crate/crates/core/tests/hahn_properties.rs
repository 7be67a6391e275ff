use hahnbound_core::arith::Rational;
use hahnbound_core::hahn::{
    damping_bound_holds_exact, hahn_q, lambda, lambda_squared, max_norm_ratio, norm_h, norm_h_closed_form,
    norm_h_unnormalized, FloatHahnTable, HahnTable,
};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Plain i128 evaluation of the explicit series, as a second opinion for small n.
fn q_i128(n: i128, r: i128, x: i128) -> (i128, i128) {
    let binom = |a: i128, b: i128| -> i128 {
        let mut v = 1i128;
        for i in 0..b {
            v = v * (a - i) / (i + 1);
        }
        v
    };
    let falling = |a: i128, b: i128| -> i128 { (0..b).map(|i| a - i).product() };
    // common denominator n^(r falling)
    let den = falling(n, r);
    let mut num = 0i128;
    for l in 0..=r {
        let sign = if l % 2 == 0 { 1 } else { -1 };
        num += sign * binom(r, l) * binom(r + l, l) * falling(x, l) * (den / falling(n, l));
    }
    (num, den)
}

#[test]
fn series_matches_machine_integer_evaluation() {
    for n in 1..=12i128 {
        for r in 0..=n {
            for x in 0..=n {
                let (num, den) = q_i128(n, r, x);
                let expect = Rational::new(BigInt::from(num), BigInt::from(den));
                assert_eq!(hahn_q(n as usize, r as usize, x as usize).unwrap(), expect, "n={n} r={r} x={x}");
            }
        }
    }
}

#[test]
fn orthogonality_exact_up_to_sixty() {
    for n in (1..=60).step_by(7).chain([60]) {
        let table = HahnTable::new(n);
        for r in 0..=n {
            for s in r..=n {
                let g = table.gram(r, s);
                if r == s {
                    assert_eq!(g, norm_h_unnormalized(n, r).unwrap(), "n={n} r={r}");
                } else {
                    assert!(g.is_zero(), "n={n} r={r} s={s}");
                }
            }
        }
    }
}

#[test]
fn float_orthonormality_at_five_hundred() {
    let table = FloatHahnTable::new(500);
    let mut worst = 0.0f64;
    for r in (0..=500).step_by(7) {
        for s in (r..=500).step_by(11) {
            let target = if r == s { 1.0 } else { 0.0 };
            worst = worst.max((table.inner(r, s) - target).abs());
        }
        worst = worst.max((table.inner(r, r) - 1.0).abs());
    }
    assert!(worst <= 1e-9, "residual {worst}");
}

#[test]
fn float_matches_exact_on_overlap() {
    for n in [5usize, 17, 33, 64] {
        let exact = HahnTable::new(n);
        let float = FloatHahnTable::new(n);
        for r in 0..=n {
            for x in 0..=n {
                let a = exact.phi_f64(r, x);
                let b = float.phi(r, x);
                assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "n={n} r={r} x={x}: {a} vs {b}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_norm(n in 0usize..80, r_frac in 0.0f64..=1.0) {
        let r = ((n as f64) * r_frac) as usize;
        prop_assert_eq!(norm_h(n, r).unwrap(), norm_h_closed_form(n, r).unwrap());
    }

    #[test]
    fn damping_strictly_decreasing(n in 2usize..200, t_frac in 0.0f64..1.0) {
        let t = (((n - 1) as f64) * t_frac) as usize;
        for r in 0..t {
            prop_assert!(lambda_squared(n, t, r + 1).unwrap() < lambda_squared(n, t, r).unwrap());
            prop_assert!(lambda(n, t, r + 1).unwrap() <= lambda(n, t, r).unwrap());
        }
    }

    #[test]
    fn norm_ratio_bounded(t in 0usize..60, s_frac in 0.0f64..=1.0) {
        let s = ((t as f64) * s_frac) as usize;
        let (r, ratio) = max_norm_ratio(s, t).unwrap();
        prop_assert_eq!(r, s);
        let cap = Rational::from_integer(BigInt::one() << (2 * s + 1));
        prop_assert!(ratio <= cap);
    }

    #[test]
    fn damping_exponential_bound(n in 2usize..120, t_frac in 0.0f64..1.0) {
        let t = (((n - 1) as f64) * t_frac) as usize;
        for r in 0..=t {
            prop_assert!(damping_bound_holds_exact(n, t, r).unwrap(), "n={} t={} r={}", n, t, r);
        }
    }
}
