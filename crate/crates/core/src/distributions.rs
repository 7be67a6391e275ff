//! Symmetric distributions over `{0,1}^n` and distances between their
//! `t`-wise marginals.
//!
//! A [`SymmetricDistribution`] stores the total probability of each Hamming
//! weight class, so `weights[j]` is the mass of all strings of weight `j` and
//! each single string of weight `j` has probability `weights[j] / C(n, j)`.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::arith::{binomial_int, int, Rational, Scalar};
use crate::error::{ensure, Error, Result};
use crate::smoothing::{check_probability_vector, SmoothingMatrix};

/// Largest `n` accepted by [`brute_force_distance`].
pub const BRUTE_FORCE_MAX_N: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricDistribution<T = Rational> {
    n: usize,
    weights: Vec<T>,
}

impl<T: Scalar> SymmetricDistribution<T> {
    /// `weights` has length `n + 1` and must be a probability vector.
    pub fn new(weights: Vec<T>) -> Result<Self> {
        ensure!(!weights.is_empty(), "weight vector must have n + 1 >= 1 entries");
        check_probability_vector(&weights, weights.len())?;
        Ok(Self { n: weights.len() - 1, weights })
    }

    /// Point mass on Hamming weight `j`.
    pub fn point_mass(n: usize, j: usize) -> Result<Self> {
        ensure!(j <= n, "j <= n violated (j = {j}, n = {n})");
        let mut weights = vec![T::zero(); n + 1];
        weights[j] = T::one();
        Ok(Self { n, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<T> {
        self.weights
    }

    /// Distribution of the Hamming weight of the first `t` coordinates.
    pub fn observed_weights(&self, kernel: &SmoothingMatrix<T>) -> Result<Vec<T>> {
        if kernel.n() != self.n {
            return Err(Error::LengthMismatch { expected: kernel.n() + 1, got: self.n + 1 });
        }
        Ok(kernel.project_unchecked(&self.weights))
    }

    pub fn to_f64(&self) -> SymmetricDistribution<f64> {
        SymmetricDistribution { n: self.n, weights: self.weights.iter().map(Scalar::to_f64).collect() }
    }
}

impl SymmetricDistribution<Rational> {
    /// Probability of one particular string of weight `j`.
    pub fn string_probability(&self, j: usize) -> Rational {
        &self.weights[j] / Rational::from_integer(binomial_int(self.n as u64, j as u64))
    }
}

fn check_pair<T>(mu: &SymmetricDistribution<T>, nu: &SymmetricDistribution<T>) -> Result<usize> {
    ensure!(mu.n == nu.n, "distributions live on different n ({} vs {})", mu.n, nu.n);
    Ok(mu.n)
}

/// Half the L1 distance between two vectors.
pub fn half_l1<T: Scalar>(p: &[T], q: &[T]) -> T {
    let sum = p.iter().zip(q).fold(T::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs());
    sum / T::from_integer(2)
}

/// `Delta_t(mu, nu)`: total variation between the observed-weight
/// distributions on `t` coordinates. For symmetric pairs this equals the
/// distance between the `t`-wise marginals.
pub fn stat_distance_t<T: Scalar>(
    mu: &SymmetricDistribution<T>,
    nu: &SymmetricDistribution<T>,
    t: usize,
) -> Result<T>
where
    SmoothingMatrix<T>: KernelBuilder,
{
    let n = check_pair(mu, nu)?;
    ensure!(t <= n, "t <= n violated (t = {t}, n = {n})");
    let kernel = SmoothingMatrix::<T>::build(n, t)?;
    stat_distance_with(mu, nu, &kernel)
}

/// [`stat_distance_t`] with a prebuilt kernel.
pub fn stat_distance_with<T: Scalar>(
    mu: &SymmetricDistribution<T>,
    nu: &SymmetricDistribution<T>,
    kernel: &SmoothingMatrix<T>,
) -> Result<T> {
    check_pair(mu, nu)?;
    let p = mu.observed_weights(kernel)?;
    let q = nu.observed_weights(kernel)?;
    Ok(half_l1(&p, &q))
}

/// Builds the kernel matching a scalar's arithmetic mode.
pub trait KernelBuilder: Sized {
    fn build(n: usize, t: usize) -> Result<Self>;
}

impl KernelBuilder for SmoothingMatrix<Rational> {
    fn build(n: usize, t: usize) -> Result<Self> {
        SmoothingMatrix::exact(n, t)
    }
}

impl KernelBuilder for SmoothingMatrix<f64> {
    fn build(n: usize, t: usize) -> Result<Self> {
        SmoothingMatrix::float(n, t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Indistinguishability<T> {
    pub holds: bool,
    /// The achieved `Delta_k`.
    pub distance: T,
}

/// Whether `Delta_k(mu, nu) <= delta`. Since `Delta_j` is nondecreasing in
/// `j`, only `j = k` is evaluated.
pub fn is_k_delta_indistinguishable<T: Scalar>(
    mu: &SymmetricDistribution<T>,
    nu: &SymmetricDistribution<T>,
    k: usize,
    delta: &T,
) -> Result<Indistinguishability<T>>
where
    SmoothingMatrix<T>: KernelBuilder,
{
    ensure!(!delta.is_negative() && *delta <= T::one(), "0 <= delta <= 1 violated");
    let distance = stat_distance_t(mu, nu, k)?;
    let holds = if T::EXACT {
        distance <= *delta
    } else {
        distance <= *delta || distance.approx_eq(delta)
    };
    Ok(Indistinguishability { holds, distance })
}

/// Brute-force counterpart of [`is_k_delta_indistinguishable`]: enumerates
/// every `j <= k` through [`brute_force_distance`].
pub fn is_k_delta_indistinguishable_brute_force(
    mu: &SymmetricDistribution<Rational>,
    nu: &SymmetricDistribution<Rational>,
    k: usize,
    delta: &Rational,
) -> Result<Indistinguishability<Rational>> {
    let mut worst = Rational::zero();
    for j in 0..=k {
        let d = brute_force_distance(mu, nu, j)?;
        if d > worst {
            worst = d;
        }
    }
    Ok(Indistinguishability { holds: worst <= *delta, distance: worst })
}

/// `mu` uniform on even-weight strings, `nu` uniform on odd-weight strings.
pub fn make_parity_pair(n: usize) -> Result<(SymmetricDistribution, SymmetricDistribution)> {
    ensure!(n >= 1, "n >= 1 violated (n = {n})");
    let half = Rational::from_integer(BigInt::from(1u8) << (n - 1));
    let class = |parity: usize| -> Vec<Rational> {
        (0..=n)
            .map(|j| {
                if j % 2 == parity {
                    Rational::from_integer(binomial_int(n as u64, j as u64)) / &half
                } else {
                    Rational::zero()
                }
            })
            .collect()
    };
    Ok((SymmetricDistribution::new(class(0))?, SymmetricDistribution::new(class(1))?))
}

/// Total variation between the marginals on coordinates `{1..t}`, computed by
/// enumerating all `2^n` strings. Independent of the smoothing kernel.
pub fn brute_force_distance(
    mu: &SymmetricDistribution<Rational>,
    nu: &SymmetricDistribution<Rational>,
    t: usize,
) -> Result<Rational> {
    let n = check_pair(mu, nu)?;
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge { n, max: BRUTE_FORCE_MAX_N });
    }
    ensure!(t <= n, "t <= n violated (t = {t}, n = {n})");
    // counts[outcome][j]: number of strings of weight j whose first t bits read `outcome`.
    let outcomes = 1usize << t;
    let mut counts = vec![vec![0u64; n + 1]; outcomes];
    for z in 0u32..(1u32 << n) {
        let outcome = (z as usize) & (outcomes - 1);
        counts[outcome][z.count_ones() as usize] += 1;
    }
    let mu_string: Vec<Rational> = (0..=n).map(|j| mu.string_probability(j)).collect();
    let nu_string: Vec<Rational> = (0..=n).map(|j| nu.string_probability(j)).collect();
    let mut total = Rational::zero();
    for row in &counts {
        let mut diff = Rational::zero();
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                diff += (&mu_string[j] - &nu_string[j]) * int(c as i64);
            }
        }
        total += diff.abs();
    }
    Ok(total / int(2))
}
