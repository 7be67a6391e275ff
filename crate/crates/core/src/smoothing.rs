//! The hypergeometric sampling operator `T_{n,t}`.
//!
//! `(T_{n,t} f)(k) = sum_a f(a) C(k,a) C(n-k,t-a) / C(n,t)`: the expected
//! value of `f` on the Hamming weight seen in `t` of `n` coordinates, given
//! total weight `k`. [`SmoothingMatrix::project`] is the adjoint direction and
//! maps a weight distribution on `{0..n}` to the observed-weight distribution
//! on `{0..t}`.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::arith::{falling_factorial, ln_binomial, BinomialTable, Rational, Scalar};
use crate::error::{ensure, Error, Result};
use crate::hahn::{lambda, FloatHahnTable, HahnTable};

/// Kernel of `T_{n,t}`: `(n+1) x (t+1)`, entry `(k, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingMatrix<T> {
    n: usize,
    t: usize,
    kernel: Vec<T>,
}

impl SmoothingMatrix<Rational> {
    pub fn exact(n: usize, t: usize) -> Result<Self> {
        ensure!(t <= n, "t <= n violated (t = {t}, n = {n})");
        let binom = BinomialTable::new(n);
        let total = binom.get(n, t);
        let mut kernel = Vec::with_capacity((n + 1) * (t + 1));
        for k in 0..=n {
            for a in 0..=t {
                let num = if a > k || t - a > n - k {
                    BigInt::zero()
                } else {
                    binom.get(k, a) * binom.get(n - k, t - a)
                };
                kernel.push(Rational::new(num, total.clone()));
            }
        }
        Ok(Self { n, t, kernel })
    }
}

impl SmoothingMatrix<f64> {
    /// Entries from exponentiated log-binomials; each row renormalized to sum 1.
    pub fn float(n: usize, t: usize) -> Result<Self> {
        ensure!(t <= n, "t <= n violated (t = {t}, n = {n})");
        let ln_total = ln_binomial(n as u64, t as u64);
        let mut kernel = Vec::with_capacity((n + 1) * (t + 1));
        for k in 0..=n {
            let start = kernel.len();
            for a in 0..=t {
                if a > k || t - a > n - k {
                    kernel.push(0.0);
                } else {
                    let ln = ln_binomial(k as u64, a as u64) + ln_binomial((n - k) as u64, (t - a) as u64) - ln_total;
                    kernel.push(libm::exp(ln));
                }
            }
            let row = &mut kernel[start..];
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= sum);
        }
        Ok(Self { n, t, kernel })
    }
}

impl<T: Scalar> SmoothingMatrix<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn entry(&self, k: usize, a: usize) -> &T {
        &self.kernel[k * (self.t + 1) + a]
    }

    pub fn row(&self, k: usize) -> &[T] {
        let w = self.t + 1;
        &self.kernel[k * w..(k + 1) * w]
    }

    /// `T_{n,t} f` for `f` on `{0..t}`; result is a function on `{0..n}`.
    pub fn apply(&self, f: &[T]) -> Result<Vec<T>> {
        if f.len() != self.t + 1 {
            return Err(Error::LengthMismatch { expected: self.t + 1, got: f.len() });
        }
        Ok((0..=self.n)
            .map(|k| {
                self.row(k)
                    .iter()
                    .zip(f)
                    .filter(|(e, _)| !e.is_zero())
                    .fold(T::zero(), |acc, (e, v)| acc + e.clone() * v.clone())
            })
            .collect())
    }

    /// Observed-weight distribution on `{0..t}` of a weight distribution `w`
    /// on `{0..n}`. `w` must be a probability vector (exactly, or within the
    /// float tolerance).
    pub fn project(&self, w: &[T]) -> Result<Vec<T>> {
        check_probability_vector(w, self.n + 1)?;
        Ok(self.project_unchecked(w))
    }

    /// Adjoint action on an arbitrary (e.g. signed) vector.
    pub fn project_unchecked(&self, w: &[T]) -> Vec<T> {
        let mut out = alloc::vec![T::zero(); self.t + 1];
        for (k, wk) in w.iter().enumerate() {
            if wk.is_zero() {
                continue;
            }
            for (o, e) in out.iter_mut().zip(self.row(k)) {
                if !e.is_zero() {
                    *o = o.clone() + wk.clone() * e.clone();
                }
            }
        }
        out
    }
}

pub(crate) fn check_probability_vector<T: Scalar>(w: &[T], len: usize) -> Result<()> {
    if w.len() != len {
        return Err(Error::LengthMismatch { expected: len, got: w.len() });
    }
    if let Some(i) = w.iter().position(|v| v.is_negative()) {
        return Err(Error::NotNormalized(alloc::format!("negative weight at index {i}")));
    }
    let total = w.iter().fold(T::zero(), |acc, v| acc + v.clone());
    if !total.approx_eq(&T::one()) {
        return Err(Error::NotNormalized(alloc::format!("weights sum to {}", total.to_f64())));
    }
    Ok(())
}

pub fn apply_t<T: Scalar>(f: &[T], m: &SmoothingMatrix<T>) -> Result<Vec<T>> {
    m.apply(f)
}

pub fn project_weights<T: Scalar>(w: &[T], m: &SmoothingMatrix<T>) -> Result<Vec<T>> {
    m.project(w)
}

/// `E[A^{l falling}] = t^{l falling} k^{l falling} / n^{l falling}` where `A`
/// is the weight observed on a uniform `t`-subset of an `n`-set containing
/// `k` ones.
pub fn factorial_moment(n: usize, t: usize, k: usize, l: usize) -> Result<Rational> {
    ensure!(l <= t, "l <= t violated (l = {l}, t = {t})");
    ensure!(t <= n, "t <= n violated (t = {t}, n = {n})");
    ensure!(k <= n, "k <= n violated (k = {k}, n = {n})");
    let l = l as u32;
    Ok(Rational::new(
        falling_factorial(t as i64, l) * falling_factorial(k as i64, l),
        falling_factorial(n as i64, l),
    ))
}

/// `sum_a a^{l falling} entry(k, a)`, the same moment read off the kernel.
pub fn kernel_factorial_moment(m: &SmoothingMatrix<Rational>, k: usize, l: usize) -> Rational {
    m.row(k)
        .iter()
        .enumerate()
        .map(|(a, e)| e * Rational::from_integer(falling_factorial(a as i64, l as u32)))
        .sum()
}

fn check_intertwining_order(n: usize, t: usize, r: usize) -> Result<()> {
    ensure!(r <= t, "r <= t violated (r = {r}, t = {t})");
    ensure!(t <= n, "t <= n violated (t = {t}, n = {n})");
    Ok(())
}

/// `max_k |(T_{n,t} Q_r^{(t)})(k) - Q_r^{(n)}(k)|`, exactly.
///
/// This is the intertwining residual in the unnormalized basis; dividing by
/// `sqrt(H_{t,r})` gives the orthonormal one, and it is zero exactly when
/// `T_{n,t} phi_r^{(t)} = lambda_{n,t,r} phi_r^{(n)}`.
pub fn intertwining_residual_exact(n: usize, t: usize, r: usize) -> Result<Rational> {
    check_intertwining_order(n, t, r)?;
    let small = HahnTable::new(t);
    let large = HahnTable::new(n);
    let m = SmoothingMatrix::exact(n, t)?;
    Ok(intertwining_residual_with(&m, &small, &large, r))
}

/// Variant of [`intertwining_residual_exact`] reusing prebuilt tables.
pub fn intertwining_residual_with(
    m: &SmoothingMatrix<Rational>,
    small: &HahnTable,
    large: &HahnTable,
    r: usize,
) -> Rational {
    let image = m.apply(small.q_row(r)).expect("table sizes match the kernel");
    image
        .iter()
        .zip(large.q_row(r))
        .map(|(a, b)| (a - b).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// `max_k |(T_{n,t} phi_r^{(t)})(k) - lambda_{n,t,r} phi_r^{(n)}(k)|` in float mode.
pub fn intertwining_residual(n: usize, t: usize, r: usize) -> Result<f64> {
    check_intertwining_order(n, t, r)?;
    let small = FloatHahnTable::new(t);
    let large = FloatHahnTable::new(n);
    let m = SmoothingMatrix::float(n, t)?;
    let lam = lambda(n, t, r)?;
    let image = m.apply(small.phi_row(r))?;
    Ok(image
        .iter()
        .zip(large.phi_row(r))
        .map(|(a, b)| libm::fabs(a - lam * b))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    /// Enumerates all `t`-subsets of an `n`-set whose first `k` elements are
    /// ones and tallies the observed weight.
    fn subset_weight_counts(n: usize, t: usize, k: usize) -> Vec<u64> {
        let mut counts = alloc::vec![0u64; t + 1];
        for mask in 0u64..(1u64 << n) {
            if mask.count_ones() as usize != t {
                continue;
            }
            let seen = (mask & ((1u64 << k) - 1)).count_ones() as usize;
            counts[seen] += 1;
        }
        counts
    }

    #[test]
    fn constant_maps_to_constant() {
        let m = SmoothingMatrix::exact(7, 3).unwrap();
        let out = m.apply(&[int(1), int(1), int(1), int(1)]).unwrap();
        assert!(out.iter().all(|v| v == &int(1)));
    }

    #[test]
    fn identity_moment_example() {
        let m = SmoothingMatrix::exact(4, 2).unwrap();
        let out = m.apply(&[int(0), int(1), int(2)]).unwrap();
        for (k, v) in out.iter().enumerate() {
            assert_eq!(v, &rat(k as i64, 2));
        }
        // against subset enumeration
        for k in 0..=4 {
            let counts = subset_weight_counts(4, 2, k);
            let mean = Rational::new(
                BigInt::from(counts.iter().enumerate().map(|(a, c)| a as u64 * c).sum::<u64>()),
                BigInt::from(6),
            );
            assert_eq!(out[k], mean);
        }
    }

    #[test]
    fn kernel_matches_enumeration() {
        let (n, t) = (7, 4);
        let m = SmoothingMatrix::exact(n, t).unwrap();
        for k in 0..=n {
            let counts = subset_weight_counts(n, t, k);
            let total: u64 = counts.iter().sum();
            for a in 0..=t {
                assert_eq!(m.entry(k, a), &Rational::new(counts[a].into(), total.into()));
            }
        }
    }

    #[test]
    fn intertwining_example() {
        let m = SmoothingMatrix::float(4, 2).unwrap();
        let small = FloatHahnTable::new(2);
        let large = FloatHahnTable::new(4);
        let out = m.apply(small.phi_row(1)).unwrap();
        let lam = libm::sqrt(3.0) / 2.0;
        for k in 0..=4 {
            assert!((out[k] - lam * large.phi(1, k)).abs() < 1e-14);
        }
        assert_eq!(intertwining_residual_exact(4, 2, 1).unwrap(), int(0));
        assert_eq!(intertwining_residual_exact(9, 5, 0).unwrap(), int(0));
        assert_eq!(intertwining_residual_exact(10, 6, 4).unwrap(), int(0));
        assert!(intertwining_residual(10, 6, 4).unwrap() <= 1e-10);
        assert!(intertwining_residual_exact(10, 6, 7).is_err());
    }

    #[test]
    fn projection_examples() {
        let id = SmoothingMatrix::exact(3, 3).unwrap();
        let w = [rat(1, 8), rat(3, 8), rat(1, 4), rat(1, 4)];
        assert_eq!(id.project(&w).unwrap(), w.to_vec());

        let m = SmoothingMatrix::exact(5, 2).unwrap();
        let point = [int(0), int(0), int(0), int(0), int(0), int(1)];
        assert_eq!(m.project(&point).unwrap(), [int(0), int(0), int(1)].to_vec());

        let m = SmoothingMatrix::exact(2, 1).unwrap();
        assert_eq!(m.project(&[rat(1, 2), int(0), rat(1, 2)]).unwrap(), [rat(1, 2), rat(1, 2)].to_vec());

        assert!(matches!(m.project(&[rat(1, 2), int(0), rat(1, 3)]), Err(Error::NotNormalized(_))));
        assert!(matches!(m.project(&[int(1), int(0)]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(m.apply(&[int(1)]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn factorial_moment_examples() {
        assert_eq!(factorial_moment(9, 4, 3, 0).unwrap(), int(1));
        assert_eq!(factorial_moment(4, 2, 3, 1).unwrap(), rat(3, 2));
        assert_eq!(factorial_moment(8, 5, 2, 3).unwrap(), int(0));
        assert!(factorial_moment(4, 2, 3, 3).is_err());
        let m = SmoothingMatrix::exact(4, 2).unwrap();
        assert_eq!(kernel_factorial_moment(&m, 3, 1), rat(3, 2));
    }

    #[test]
    fn float_kernel_rows_are_stochastic() {
        for (n, t) in [(10, 3), (200, 70), (1000, 999)] {
            let m = SmoothingMatrix::float(n, t).unwrap();
            for k in 0..=n {
                let s: f64 = m.row(k).iter().sum();
                assert!((s - 1.0).abs() <= 1e-12);
            }
        }
    }
}
