//! Hahn polynomials `Q_r^{(n)}` on `{0, ..., n}` (the `alpha = beta = 0`
//! family), their norms, the orthonormal basis `phi_r^{(n)}`, the damping
//! ratios `lambda_{n,t,r}` and the damping exponent `E_{n,t,s}`.
//!
//! Two evaluation paths exist. The exact path sums the explicit
//! hypergeometric series with big integers. The float path treats the
//! three-term recurrence as a symmetric Jacobi matrix whose eigenvalues are
//! exactly `0..=n`, and recovers each column `(phi_r(x))_r` by a twisted
//! factorization at the known eigenvalue `x`. Running the recurrence forward
//! from `r = 0` alone is unstable: near `x = 0` and `x = n` the polynomial is
//! the decaying solution.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{exp_neg_lower_bound, falling_factorial, int, rat, rational_to_f64, BinomialTable, Rational, SignedLog};
use crate::error::{ensure, Result};

/// `Q_r^{(n)}(x)` by direct summation of the explicit series, exactly.
pub fn hahn_q(n: usize, r: usize, x: usize) -> Result<Rational> {
    ensure!(r <= n, "r <= n violated (r = {r}, n = {n})");
    ensure!(x <= n, "x <= n violated (x = {x}, n = {n})");
    let mut sum = Rational::zero();
    for l in 0..=r {
        let coeff = crate::arith::binomial_int(r as u64, l as u64)
            * crate::arith::binomial_int((r + l) as u64, l as u64);
        let term = Rational::new(
            coeff * falling_factorial(x as i64, l as u32),
            falling_factorial(n as i64, l as u32),
        );
        if l % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(sum)
}

/// Normalized squared norm `H_{n,r} = ||Q_r^{(n)}||_n^2`, product formula.
pub fn norm_h(n: usize, r: usize) -> Result<Rational> {
    ensure!(r <= n, "r <= n violated (r = {r}, n = {n})");
    let mut num = BigInt::one();
    let mut den = BigInt::from(2 * r + 1);
    for j in 0..r {
        num *= BigInt::from(n + j + 2);
        den *= BigInt::from(n - j);
    }
    Ok(Rational::new(num, den))
}

/// `H_{n,r}` from the factorial closed form
/// `(n+r+1)! (n-r)! / ((2r+1) (n!)^2 (n+1))`.
pub fn norm_h_closed_form(n: usize, r: usize) -> Result<Rational> {
    ensure!(r <= n, "r <= n violated (r = {r}, n = {n})");
    use crate::arith::factorial;
    let num = factorial((n + r + 1) as u64) * factorial((n - r) as u64);
    let nf = factorial(n as u64);
    let den = nf.clone() * nf * num_bigint::BigUint::from((2 * r + 1) * (n + 1));
    Ok(Rational::new(num.into(), den.into()))
}

/// Unnormalized squared norm `h_{n,r} = sum_x Q_r(x)^2 = (n+1) H_{n,r}`.
pub fn norm_h_unnormalized(n: usize, r: usize) -> Result<Rational> {
    Ok(norm_h(n, r)? * int((n + 1) as i64))
}

/// `ln H_{n,r}`, accurate for large `n`.
pub fn ln_norm_h(n: usize, r: usize) -> Result<f64> {
    ensure!(r <= n, "r <= n violated (r = {r}, n = {n})");
    let mut acc = -libm::log((2 * r + 1) as f64);
    for j in 0..r {
        acc += libm::log1p((2 * j + 2) as f64 / (n - j) as f64);
    }
    Ok(acc)
}

/// `phi_r^{(n)}(x)` kept as the exact pair `(Q, H)` with value `Q / sqrt(H)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Phi {
    pub q: Rational,
    pub h: Rational,
}

impl Phi {
    /// `phi^2 = Q^2 / H`, exact.
    pub fn square(&self) -> Rational {
        &self.q * &self.q / &self.h
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.q) / libm::sqrt(rational_to_f64(&self.h))
    }
}

pub fn phi(n: usize, r: usize, x: usize) -> Result<Phi> {
    Ok(Phi { q: hahn_q(n, r, x)?, h: norm_h(n, r)? })
}

/// `phi_r^{(n)}(x)` in float mode. Costs `O(n)`; use [`FloatHahnTable`] for
/// repeated evaluation.
pub fn phi_f64(n: usize, r: usize, x: usize) -> Result<f64> {
    ensure!(r <= n, "r <= n violated (r = {r}, n = {n})");
    ensure!(x <= n, "x <= n violated (x = {x}, n = {n})");
    Ok(phi_column(n, x)[r])
}

/// `lambda_{n,t,r}^2 = H_{n,r} / H_{t,r}`, exactly.
pub fn lambda_squared(n: usize, t: usize, r: usize) -> Result<Rational> {
    ensure!(t <= n, "t <= n violated (t = {t}, n = {n})");
    ensure!(r <= t, "r <= t violated (r = {r}, t = {t})");
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..r {
        num *= BigInt::from((t - j) * (n + j + 2));
        den *= BigInt::from((n - j) * (t + j + 2));
    }
    Ok(Rational::new(num, den))
}

/// `ln lambda_{n,t,r}`, summed as `log1p(-eps_j)` so values near 1 keep
/// full precision.
pub fn ln_lambda(n: usize, t: usize, r: usize) -> Result<f64> {
    ensure!(t <= n, "t <= n violated (t = {t}, n = {n})");
    ensure!(r <= t, "r <= t violated (r = {r}, t = {t})");
    let gap = (n - t) as f64;
    let mut acc = 0.0;
    for j in 0..r {
        let eps = 2.0 * gap * (j + 1) as f64 / ((n - j) as f64 * (t + j + 2) as f64);
        acc += libm::log1p(-eps);
    }
    Ok(0.5 * acc)
}

pub fn lambda(n: usize, t: usize, r: usize) -> Result<f64> {
    Ok(libm::exp(ln_lambda(n, t, r)?))
}

fn check_exponent_order(n: usize, t: usize, s: usize) -> Result<()> {
    ensure!(s < t, "s < t violated (s = {s}, t = {t})");
    ensure!(t <= n, "t <= n violated (t = {t}, n = {n})");
    ensure!(n > 0, "n > 0 violated");
    Ok(())
}

/// Damping exponent `E_{n,t,s} = (n-t)(s+1)(s+2) / (2n(t+s+2))`.
pub fn exponent_e(n: usize, t: usize, s: usize) -> Result<f64> {
    check_exponent_order(n, t, s)?;
    let (n, t, s) = (n as f64, t as f64, s as f64);
    Ok((n - t) * (s + 1.0) * (s + 2.0) / (2.0 * n * (t + s + 2.0)))
}

pub fn exponent_e_exact(n: usize, t: usize, s: usize) -> Result<Rational> {
    check_exponent_order(n, t, s)?;
    let num = BigInt::from(n - t) * BigInt::from((s + 1) * (s + 2));
    let den = BigInt::from(2 * n) * BigInt::from(t + s + 2);
    Ok(Rational::new(num, den))
}

/// Exact check of `lambda_{n,t,r} <= exp(-(n-t) r (r+1) / (2n (t+r+1)))`,
/// compared in squares against a certified lower bound of the exponential.
pub fn damping_bound_holds_exact(n: usize, t: usize, r: usize) -> Result<bool> {
    ensure!(r <= t && t < n, "r <= t < n violated (r = {r}, t = {t}, n = {n})");
    let two_e = Rational::new(
        BigInt::from(n - t) * BigInt::from(r * (r + 1)),
        BigInt::from(n) * BigInt::from(t + r + 1),
    );
    Ok(lambda_squared(n, t, r)? <= exp_neg_lower_bound(&two_e, 256))
}

/// `max_{r <= s} H_{s,r} / H_{t,r}` with its maximizing `r`, exactly. Ties go
/// to the larger `r`.
pub fn max_norm_ratio(s: usize, t: usize) -> Result<(usize, Rational)> {
    ensure!(s <= t, "s <= t violated (s = {s}, t = {t})");
    let mut best = (0, Rational::one());
    for r in 1..=s {
        let ratio = norm_h(s, r)? / norm_h(t, r)?;
        if ratio >= best.1 {
            best = (r, ratio);
        }
    }
    Ok(best)
}

/// Exact table of `Q_r^{(n)}(x)` and `H_{n,r}` for one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HahnTable {
    n: usize,
    /// Row-major, `q[r * (n + 1) + x]`.
    q: Vec<Rational>,
    norms: Vec<Rational>,
}

impl HahnTable {
    pub fn new(n: usize) -> Self {
        let width = n + 1;
        let binom = BinomialTable::new(2 * n);
        // Q_r(x) * n^{r falling} = sum_l (-1)^l C(r,l) C(r+l,l) x^{l falling} (n-l)^{(r-l) falling}
        let xf: Vec<Vec<BigInt>> = (0..=n)
            .map(|x| (0..=n).map(|l| falling_factorial(x as i64, l as u32)).collect())
            .collect();
        let mut q = Vec::with_capacity(width * width);
        for r in 0..=n {
            let coeffs: Vec<BigInt> = (0..=r)
                .map(|l| {
                    let c = binom.get(r, l) * binom.get(r + l, l);
                    let tail = falling_factorial((n - l) as i64, (r - l) as u32);
                    if l % 2 == 0 {
                        c * tail
                    } else {
                        -(c * tail)
                    }
                })
                .collect();
            let den = falling_factorial(n as i64, r as u32);
            for row in xf.iter() {
                let num: BigInt = coeffs.iter().zip(row.iter()).map(|(c, f)| c * f).sum();
                q.push(Rational::new(num, den.clone()));
            }
        }
        let norms = (0..=n).map(|r| norm_h(n, r).expect("r <= n")).collect();
        Self { n, q, norms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self, r: usize, x: usize) -> &Rational {
        &self.q[r * (self.n + 1) + x]
    }

    pub fn q_row(&self, r: usize) -> &[Rational] {
        let w = self.n + 1;
        &self.q[r * w..(r + 1) * w]
    }

    pub fn norm(&self, r: usize) -> &Rational {
        &self.norms[r]
    }

    pub fn norms(&self) -> &[Rational] {
        &self.norms
    }

    pub fn phi(&self, r: usize, x: usize) -> Phi {
        Phi { q: self.q(r, x).clone(), h: self.norms[r].clone() }
    }

    pub fn phi_f64(&self, r: usize, x: usize) -> f64 {
        self.phi(r, x).to_f64()
    }

    /// `sum_x Q_r(x) Q_s(x)`, exactly.
    pub fn gram(&self, r: usize, s: usize) -> Rational {
        self.q_row(r).iter().zip(self.q_row(s)).map(|(a, b)| a * b).sum()
    }

    /// Overwrites one entry. Used by negative-control self tests.
    #[doc(hidden)]
    pub fn set_q(&mut self, r: usize, x: usize, value: Rational) {
        let w = self.n + 1;
        self.q[r * w + x] = value;
    }
}

/// Float table of `phi_r^{(n)}(x)` and `ln H_{n,r}` for one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatHahnTable {
    n: usize,
    /// Row-major, `phi[r * (n + 1) + x]`.
    phi: Vec<f64>,
    ln_norms: Vec<f64>,
}

impl FloatHahnTable {
    pub fn new(n: usize) -> Self {
        let width = n + 1;
        let offdiag = jacobi_offdiagonal(n);
        let mut phi = vec![0.0; width * width];
        for x in 0..=n {
            let col = twisted_column(n, x, &offdiag);
            for (r, v) in col.into_iter().enumerate() {
                phi[r * width + x] = v;
            }
        }
        let ln_norms = (0..=n).map(|r| ln_norm_h(n, r).expect("r <= n")).collect();
        Self { n, phi, ln_norms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phi(&self, r: usize, x: usize) -> f64 {
        self.phi[r * (self.n + 1) + x]
    }

    pub fn phi_row(&self, r: usize) -> &[f64] {
        let w = self.n + 1;
        &self.phi[r * w..(r + 1) * w]
    }

    pub fn ln_norm(&self, r: usize) -> f64 {
        self.ln_norms[r]
    }

    /// `Q_r(x) = phi_r(x) sqrt(H_{n,r})` in log space (it overflows f64 for
    /// large `n`).
    pub fn q(&self, r: usize, x: usize) -> SignedLog {
        SignedLog::from_f64(self.phi(r, x)) * SignedLog::from_ln(1, 0.5 * self.ln_norms[r])
    }

    /// `<phi_r, phi_s>_n`.
    pub fn inner(&self, r: usize, s: usize) -> f64 {
        let dot: f64 = self.phi_row(r).iter().zip(self.phi_row(s)).map(|(a, b)| a * b).sum();
        dot / (self.n + 1) as f64
    }

    #[doc(hidden)]
    pub fn set_phi(&mut self, r: usize, x: usize, value: f64) {
        let w = self.n + 1;
        self.phi[r * w + x] = value;
    }
}

/// Off-diagonal of the symmetric Jacobi matrix of the orthonormal family:
/// `x phi_r = e_r phi_{r+1} + (n/2) phi_r + e_{r-1} phi_{r-1}`.
fn jacobi_offdiagonal(n: usize) -> Vec<f64> {
    (0..n)
        .map(|r| {
            let (r, nf) = (r as f64, n as f64);
            let ratio = (nf - r) * (nf + r + 2.0) / ((2.0 * r + 1.0) * (2.0 * r + 3.0));
            -(r + 1.0) / 2.0 * libm::sqrt(ratio)
        })
        .collect()
}

/// Column `(phi_0(x), ..., phi_n(x))`.
pub fn phi_column(n: usize, x: usize) -> Vec<f64> {
    twisted_column(n, x, &jacobi_offdiagonal(n))
}

fn twisted_column(n: usize, x: usize, e: &[f64]) -> Vec<f64> {
    if n == 0 {
        return vec![1.0];
    }
    const TINY: f64 = 1e-300;
    let guard = |v: f64| if v == 0.0 { TINY } else { v };
    let d = n as f64 / 2.0 - x as f64;
    let mut fwd = vec![0.0; n + 1];
    let mut bwd = vec![0.0; n + 1];
    fwd[0] = guard(d);
    for r in 1..=n {
        fwd[r] = guard(d - e[r - 1] * e[r - 1] / fwd[r - 1]);
    }
    bwd[n] = guard(d);
    for r in (0..n).rev() {
        bwd[r] = guard(d - e[r] * e[r] / bwd[r + 1]);
    }
    let twist = (0..=n)
        .min_by(|&a, &b| {
            let ga = libm::fabs(fwd[a] + bwd[a] - d);
            let gb = libm::fabs(fwd[b] + bwd[b] - d);
            ga.partial_cmp(&gb).unwrap_or(core::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    let mut z = vec![0.0; n + 1];
    z[twist] = 1.0;
    for r in (0..twist).rev() {
        z[r] = -e[r] * z[r + 1] / fwd[r];
    }
    for r in twist + 1..=n {
        z[r] = -e[r - 1] * z[r - 1] / bwd[r];
    }
    let z0 = z[0];
    z.iter_mut().for_each(|v| *v /= z0);
    z
}

/// `lambda_{n,t,r}` for `0 <= r <= t < n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingSpectrum {
    n: usize,
    t: usize,
    lambdas: Vec<f64>,
}

impl DampingSpectrum {
    pub fn new(n: usize, t: usize) -> Result<Self> {
        ensure!(t < n, "t < n violated (t = {t}, n = {n})");
        let gap = (n - t) as f64;
        let mut ln = 0.0;
        let mut lambdas = Vec::with_capacity(t + 1);
        lambdas.push(1.0);
        for j in 0..t {
            let eps = 2.0 * gap * (j + 1) as f64 / ((n - j) as f64 * (t + j + 2) as f64);
            ln += 0.5 * libm::log1p(-eps);
            lambdas.push(libm::exp(ln));
        }
        Ok(Self { n, t, lambdas })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn get(&self, r: usize) -> f64 {
        self.lambdas[r]
    }
}

/// Exact `lambda_{n,t,r}^2` for `0 <= r <= t`, by cumulative product.
pub fn lambda_squared_spectrum(n: usize, t: usize) -> Result<Vec<Rational>> {
    ensure!(t <= n, "t <= n violated (t = {t}, n = {n})");
    let mut out = Vec::with_capacity(t + 1);
    let mut acc = Rational::one();
    out.push(acc.clone());
    for j in 0..t {
        acc *= rat(((t - j) * (n + j + 2)) as i64, ((n - j) * (t + j + 2)) as i64);
        out.push(acc.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_examples() {
        for x in 0..=6 {
            assert_eq!(hahn_q(6, 0, x).unwrap(), int(1));
        }
        assert_eq!(hahn_q(4, 1, 2).unwrap(), int(0));
        assert_eq!(hahn_q(2, 2, 1).unwrap(), int(-2));
        assert!(hahn_q(3, 4, 0).is_err());
        assert!(hahn_q(3, 1, 4).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm_h(7, 0).unwrap(), int(1));
        assert_eq!(norm_h(4, 1).unwrap(), rat(1, 2));
        assert_eq!(norm_h_unnormalized(4, 1).unwrap(), rat(5, 2));
        assert!(norm_h(2, 3).is_err());
        for n in 0..=12 {
            for r in 0..=n {
                let h = norm_h(n, r).unwrap();
                assert_eq!(norm_h_unnormalized(n, r).unwrap() / &h, int(n as i64 + 1));
                assert_eq!(norm_h_closed_form(n, r).unwrap(), h);
            }
        }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(5, 0, 3).unwrap().to_f64(), 1.0);
        let p = phi(4, 1, 0).unwrap();
        assert_eq!(p.square(), int(2));
        assert!((p.to_f64() - core::f64::consts::SQRT_2).abs() < 1e-15);
        let table = HahnTable::new(4);
        let norm: Rational = (0..=4).map(|x| table.phi(1, x).square()).sum::<Rational>() / int(5);
        assert_eq!(norm, int(1));
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda(9, 4, 0).unwrap(), 1.0);
        assert_eq!(lambda_squared(4, 2, 1).unwrap(), rat(3, 4));
        assert!((lambda(4, 2, 1).unwrap() - libm::sqrt(3.0) / 2.0).abs() < 1e-15);
        for r in 0..=6 {
            assert_eq!(lambda_squared(6, 6, r).unwrap(), int(1));
            assert_eq!(lambda(6, 6, r).unwrap(), 1.0);
        }
        assert!(lambda(6, 3, 4).is_err());
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(exponent_e(50, 50, 10).unwrap(), 0.0);
        assert!((exponent_e(100, 50, 20).unwrap() - 23100.0 / 14400.0).abs() < 1e-15);
        assert_eq!(exponent_e_exact(100, 50, 20).unwrap(), rat(23100, 14400));
        assert_eq!(exponent_e(4, 2, 0).unwrap(), 0.125);
        assert!(exponent_e(10, 4, 4).is_err());
        assert!(exponent_e(10, 11, 4).is_err());
    }

    #[test]
    fn damping_spot_value() {
        let lam = lambda(4, 2, 1).unwrap();
        assert!(lam <= libm::exp(-exponent_e(4, 2, 0).unwrap()));
        assert!((libm::exp(-0.125) - 0.8825).abs() < 1e-4);
    }

    #[test]
    fn table_matches_direct_sum() {
        for n in [0, 1, 2, 5, 9] {
            let table = HahnTable::new(n);
            for r in 0..=n {
                for x in 0..=n {
                    assert_eq!(table.q(r, x), &hahn_q(n, r, x).unwrap(), "n={n} r={r} x={x}");
                }
            }
        }
    }

    #[test]
    fn float_table_matches_exact() {
        for n in [1, 2, 3, 8, 17, 40, 64] {
            let exact = HahnTable::new(n);
            let float = FloatHahnTable::new(n);
            for r in 0..=n {
                assert!((float.ln_norm(r) - libm::log(rational_to_f64(exact.norm(r)))).abs() < 1e-12);
                for x in 0..=n {
                    let e = exact.phi_f64(r, x);
                    let f = float.phi(r, x);
                    assert!((e - f).abs() <= 1e-9 * e.abs().max(1.0), "n={n} r={r} x={x}: {e} vs {f}");
                }
            }
        }
    }

    #[test]
    fn spectrum_properties() {
        let spec = DampingSpectrum::new(20, 9).unwrap();
        assert_eq!(spec.get(0), 1.0);
        assert!(spec.lambdas().windows(2).all(|w| w[1] < w[0]));
        let exact = lambda_squared_spectrum(20, 9).unwrap();
        for (r, sq) in exact.iter().enumerate() {
            assert_eq!(sq, &lambda_squared(20, 9, r).unwrap());
            assert!((libm::sqrt(rational_to_f64(sq)) - spec.get(r)).abs() < 1e-14);
        }
        assert!(DampingSpectrum::new(5, 5).is_err());
    }

    #[test]
    fn damping_and_norm_ratio_checks() {
        assert!(damping_bound_holds_exact(4, 2, 1).unwrap());
        assert!(damping_bound_holds_exact(9, 8, 0).unwrap());
        assert!(damping_bound_holds_exact(4, 4, 1).is_err());
        let (r, ratio) = max_norm_ratio(3, 5).unwrap();
        assert_eq!(r, 3);
        assert_eq!(ratio, norm_h(3, 3).unwrap() / norm_h(5, 3).unwrap());
        assert_eq!(max_norm_ratio(0, 5).unwrap(), (0, Rational::one()));
    }
}
