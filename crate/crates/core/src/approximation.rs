//! Low-degree surrogates for tests on `t` bits.
//!
//! A test `f: {0..t} -> [-1, 1]` expands as `f = sum_r a_r phi_r^{(t)}`. The
//! surrogate `h_f = sum_{r <= s} a_r (lambda_{n,t,r} / lambda_{n,s,r}) phi_r^{(s)}`
//! reads only `s` bits, and `T_{n,s} h_f` is exactly the degree `<= s` part of
//! `T_{n,t} f`. What is left over, `R_f = T_{n,t} f - T_{n,s} h_f`, is damped
//! by `lambda_{n,t,s+1} <= exp(-E_{n,t,s})`.
//!
//! The float path works in the orthonormal basis. The exact path works in the
//! unnormalized basis `Q_r`, where `f = sum_r b_r Q_r^{(t)}` with
//! `b_r = a_r / sqrt(H_{t,r})` and `h_f = sum_{r <= s} b_r Q_r^{(s)}`, so no
//! square roots appear.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{exp_neg_lower_bound, int, Rational, Scalar};
use crate::error::{ensure, Error, Result};
use crate::hahn::{exponent_e, exponent_e_exact, FloatHahnTable, HahnTable};
use crate::smoothing::SmoothingMatrix;

/// Bits of precision for certified `exp` bounds in exact checks.
const EXP_PRECISION_BITS: u32 = 256;

/// Orthonormal Hahn coefficients `a_r = <f, phi_r^{(t)}>_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct HahnExpansion {
    pub t: usize,
    pub coeffs: Vec<f64>,
}

impl HahnExpansion {
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum()
    }

    pub fn reconstruct(&self, table: &FloatHahnTable) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.t + 1];
        for (r, a) in self.coeffs.iter().enumerate() {
            for (o, p) in out.iter_mut().zip(table.phi_row(r)) {
                *o += a * p;
            }
        }
        out
    }
}

/// Exact expansion in the unnormalized basis, `f = sum_r b_r Q_r^{(t)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactHahnExpansion {
    pub t: usize,
    pub q_coeffs: Vec<Rational>,
    /// `H_{t,r}`, so that `a_r^2 = b_r^2 H_{t,r}`.
    pub norms: Vec<Rational>,
}

impl ExactHahnExpansion {
    pub fn coeff_squared(&self, r: usize) -> Rational {
        &self.q_coeffs[r] * &self.q_coeffs[r] * &self.norms[r]
    }

    /// `sum_r a_r^2`.
    pub fn energy(&self) -> Rational {
        (0..=self.t).map(|r| self.coeff_squared(r)).sum()
    }

    pub fn coeff_f64(&self, r: usize) -> f64 {
        
        self.q_coeffs[r].to_f64() * libm::sqrt(self.norms[r].to_f64())
    }

    pub fn reconstruct(&self, table: &HahnTable) -> Vec<Rational> {
        let mut out = alloc::vec![Rational::zero(); self.t + 1];
        for (r, b) in self.q_coeffs.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            for (o, q) in out.iter_mut().zip(table.q_row(r)) {
                *o += b * q;
            }
        }
        out
    }
}

pub fn hahn_expand(f: &[f64], table: &FloatHahnTable) -> Result<HahnExpansion> {
    let t = table.n();
    check_len(f, t + 1)?;
    let coeffs = (0..=t)
        .map(|r| f.iter().zip(table.phi_row(r)).map(|(v, p)| v * p).sum::<f64>() / (t + 1) as f64)
        .collect();
    Ok(HahnExpansion { t, coeffs })
}

pub fn hahn_expand_exact(f: &[Rational], table: &HahnTable) -> Result<ExactHahnExpansion> {
    let t = table.n();
    check_len(f, t + 1)?;
    let denom = int((t + 1) as i64);
    let q_coeffs = (0..=t)
        .map(|r| {
            let dot: Rational = f.iter().zip(table.q_row(r)).map(|(v, q)| v * q).sum();
            dot / (&denom * table.norm(r))
        })
        .collect();
    Ok(ExactHahnExpansion { t, q_coeffs, norms: table.norms().to_vec() })
}

/// Output of the low-degree construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate<T> {
    pub n: usize,
    pub t: usize,
    pub s: usize,
    /// `h_f` on `{0..s}`.
    pub h_values: Vec<T>,
    /// `R_f = T_{n,t} f - T_{n,s} h_f` on `{0..n}`.
    pub remainder: Vec<T>,
    /// `||R_f||_inf`.
    pub remainder_sup: T,
}

impl<T: Scalar> Surrogate<T> {
    pub fn h_sup(&self) -> T {
        sup_norm(&self.h_values)
    }

    /// `||R_f||_n^2 = (1/(n+1)) sum_k R_f(k)^2`.
    pub fn remainder_norm_squared(&self) -> T {
        let sum = self.remainder.iter().fold(T::zero(), |acc, v| acc + v.clone() * v.clone());
        sum / T::from_integer((self.n + 1) as i64)
    }
}

/// `sqrt(2(s+1)) 2^s`, the guaranteed bound on `||h_f||_inf`.
pub fn surrogate_sup_bound(s: usize) -> f64 {
    libm::sqrt(2.0 * (s + 1) as f64) * libm::exp2(s as f64)
}

/// `sqrt(n+1) exp(-E_{n,t,s})`, the guaranteed bound on `||R_f||_inf`.
pub fn remainder_sup_bound(n: usize, t: usize, s: usize) -> Result<f64> {
    Ok(libm::sqrt((n + 1) as f64) * libm::exp(-exponent_e(n, t, s)?))
}

/// Exact check of `||h||_inf <= sqrt(2(s+1)) 2^s`, compared in squares.
pub fn surrogate_bound_holds_exact(h_sup: &Rational, s: usize) -> bool {
    let rhs = Rational::from_integer(BigInt::from(2 * (s + 1)) * (BigInt::one() << (2 * s)));
    h_sup * h_sup <= rhs
}

/// Exact check of `||R||_inf <= sqrt(n+1) exp(-E)`, using a certified lower
/// bound for `exp(-2E)`.
pub fn remainder_bound_holds_exact(r_sup: &Rational, n: usize, t: usize, s: usize) -> Result<bool> {
    let two_e = exponent_e_exact(n, t, s)? * int(2);
    let rhs = int((n + 1) as i64) * exp_neg_lower_bound(&two_e, EXP_PRECISION_BITS);
    Ok(r_sup * r_sup <= rhs)
}

/// Exact check of `||R||_n^2 <= exp(-2E)`.
pub fn remainder_norm_bound_holds_exact(norm_sq: &Rational, n: usize, t: usize, s: usize) -> Result<bool> {
    let two_e = exponent_e_exact(n, t, s)? * int(2);
    Ok(*norm_sq <= exp_neg_lower_bound(&two_e, EXP_PRECISION_BITS))
}

fn check_order(n: usize, t: usize, s: usize) -> Result<()> {
    ensure!(s < t, "s < t violated (s = {s}, t = {t})");
    ensure!(t < n, "t < n violated (t = {t}, n = {n})");
    Ok(())
}

fn check_len<T>(f: &[T], len: usize) -> Result<()> {
    if f.len() != len {
        return Err(Error::LengthMismatch { expected: len, got: f.len() });
    }
    Ok(())
}

fn check_sup_norm<T: Scalar>(f: &[T]) -> Result<()> {
    match f.iter().position(|v| v.abs() > T::one()) {
        Some(index) => Err(Error::SupNormExceeded { index }),
        None => Ok(()),
    }
}

fn sup_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| {
        let a = x.abs();
        if a > acc {
            a
        } else {
            acc
        }
    })
}

fn remainder_from<T: Scalar>(n: usize, big: Vec<T>, small: Vec<T>) -> (Vec<T>, T) {
    debug_assert_eq!(big.len(), n + 1);
    let remainder: Vec<T> = big.into_iter().zip(small).map(|(a, b)| a - b).collect();
    let sup = sup_norm(&remainder);
    (remainder, sup)
}

/// Float-mode construction. Requires `0 <= s < t < n` and `||f||_inf <= 1`.
pub fn build_surrogate(f: &[f64], n: usize, s: usize) -> Result<Surrogate<f64>> {
    let t = f.len().checked_sub(1).ok_or(Error::LengthMismatch { expected: 1, got: 0 })?;
    check_order(n, t, s)?;
    check_sup_norm(f)?;
    let t_table = FloatHahnTable::new(t);
    let s_table = FloatHahnTable::new(s);
    build_surrogate_with(f, n, s, &t_table, &s_table)
}

/// [`build_surrogate`] with caller-provided tables for `t` and `s`.
pub fn build_surrogate_with(
    f: &[f64],
    n: usize,
    s: usize,
    t_table: &FloatHahnTable,
    s_table: &FloatHahnTable,
) -> Result<Surrogate<f64>> {
    check_order(n, t_table.n(), s)?;
    ensure!(s_table.n() == s, "table for s has n = {} (s = {s})", s_table.n());
    SurrogateBuilder::from_parts(n, t_table.clone(), s_table.clone())?.build(f)
}

/// Float construction for one `(n, t, s)` with tables and kernels cached, for
/// running many test functions.
#[derive(Debug, Clone)]
pub struct SurrogateBuilder {
    n: usize,
    t_table: FloatHahnTable,
    s_table: FloatHahnTable,
    /// `lambda_{n,t,r} / lambda_{n,s,r} = sqrt(H_{s,r} / H_{t,r})`.
    ratios: Vec<f64>,
    big: SmoothingMatrix<f64>,
    small: SmoothingMatrix<f64>,
}

impl SurrogateBuilder {
    pub fn new(n: usize, t: usize, s: usize) -> Result<Self> {
        check_order(n, t, s)?;
        Self::from_parts(n, FloatHahnTable::new(t), FloatHahnTable::new(s))
    }

    fn from_parts(n: usize, t_table: FloatHahnTable, s_table: FloatHahnTable) -> Result<Self> {
        let (t, s) = (t_table.n(), s_table.n());
        check_order(n, t, s)?;
        let ratios = (0..=s).map(|r| libm::exp(0.5 * (s_table.ln_norm(r) - t_table.ln_norm(r)))).collect();
        Ok(Self { n, ratios, big: SmoothingMatrix::float(n, t)?, small: SmoothingMatrix::float(n, s)?, t_table, s_table })
    }

    pub fn build(&self, f: &[f64]) -> Result<Surrogate<f64>> {
        let (n, t, s) = (self.n, self.t_table.n(), self.s_table.n());
        check_len(f, t + 1)?;
        check_sup_norm(f)?;
        let expansion = hahn_expand(f, &self.t_table)?;
        let mut h_values = alloc::vec![0.0; s + 1];
        for r in 0..=s {
            let coeff = expansion.coeffs[r] * self.ratios[r];
            for (h, p) in h_values.iter_mut().zip(self.s_table.phi_row(r)) {
                *h += coeff * p;
            }
        }
        let big = self.big.apply(f)?;
        let small = self.small.apply(&h_values)?;
        let (remainder, remainder_sup) = remainder_from(n, big, small);
        Ok(Surrogate { n, t, s, h_values, remainder, remainder_sup })
    }
}

/// Exact construction in the unnormalized basis.
pub fn build_surrogate_exact(f: &[Rational], n: usize, s: usize) -> Result<Surrogate<Rational>> {
    let t = f.len().checked_sub(1).ok_or(Error::LengthMismatch { expected: 1, got: 0 })?;
    ExactSurrogateBuilder::new(n, t, s)?.build(f)
}

/// Exact counterpart of [`SurrogateBuilder`].
#[derive(Debug, Clone)]
pub struct ExactSurrogateBuilder {
    n: usize,
    t_table: HahnTable,
    s_table: HahnTable,
    big: SmoothingMatrix<Rational>,
    small: SmoothingMatrix<Rational>,
}

impl ExactSurrogateBuilder {
    pub fn new(n: usize, t: usize, s: usize) -> Result<Self> {
        check_order(n, t, s)?;
        Ok(Self {
            n,
            t_table: HahnTable::new(t),
            s_table: HahnTable::new(s),
            big: SmoothingMatrix::exact(n, t)?,
            small: SmoothingMatrix::exact(n, s)?,
        })
    }

    pub fn build(&self, f: &[Rational]) -> Result<Surrogate<Rational>> {
        let (n, t, s) = (self.n, self.t_table.n(), self.s_table.n());
        check_len(f, t + 1)?;
        check_sup_norm(f)?;
        let expansion = hahn_expand_exact(f, &self.t_table)?;
        let mut h_values = alloc::vec![Rational::zero(); s + 1];
        for r in 0..=s {
            let b = &expansion.q_coeffs[r];
            if b.is_zero() {
                continue;
            }
            for (h, q) in h_values.iter_mut().zip(self.s_table.q_row(r)) {
                *h += b * q;
            }
        }
        let big = self.big.apply(f)?;
        let small = self.small.apply(&h_values)?;
        let (remainder, remainder_sup) = remainder_from(n, big, small);
        Ok(Surrogate { n, t, s, h_values, remainder, remainder_sup })
    }
}

/// Permissive variant for tests with `||f||_inf > 1`: builds the surrogate of
/// `f / c` with `c = max(1, ||f||_inf)` and scales the result back by `c`.
/// Both norm guarantees then hold multiplied by the returned `c`.
pub fn build_surrogate_rescaled(f: &[f64], n: usize, s: usize) -> Result<(Surrogate<f64>, f64)> {
    let scale = f.iter().fold(1.0f64, |acc, v| acc.max(libm::fabs(*v)));
    let scaled: Vec<f64> = f.iter().map(|v| v / scale).collect();
    let mut sur = build_surrogate(&scaled, n, s)?;
    sur.h_values.iter_mut().for_each(|v| *v *= scale);
    sur.remainder.iter_mut().for_each(|v| *v *= scale);
    sur.remainder_sup *= scale;
    Ok((sur, scale))
}

/// Pointwise `R_f` on `{0..n}` in float mode.
pub fn remainder_profile(f: &[f64], n: usize, s: usize) -> Result<Vec<f64>> {
    Ok(build_surrogate(f, n, s)?.remainder)
}

pub fn remainder_profile_exact(f: &[Rational], n: usize, s: usize) -> Result<Vec<Rational>> {
    Ok(build_surrogate_exact(f, n, s)?.remainder)
}
