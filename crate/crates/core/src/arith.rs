//! Number types shared by the exact and floating-point paths.
//!
//! Exact quantities are [`Rational`] (arbitrary precision, never rounded).
//! Floating quantities that come from products of factorials are carried as
//! [`SignedLog`] and only exponentiated at the end.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Debug;
use core::ops::Mul;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Rational = BigRational;

/// Arithmetic mode of a computation path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Float,
}

impl core::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "rational" => Ok(Mode::Exact),
            "float" | "f64" => Ok(Mode::Float),
            other => Err(Error::Parse(alloc::format!("unknown arithmetic mode `{other}`"))),
        }
    }
}

/// Relative tolerance used by float-mode comparisons.
pub const FLOAT_REL_TOL: f64 = 1e-9;
/// Absolute floor used by float-mode comparisons near zero.
pub const FLOAT_ABS_TOL: f64 = 1e-12;

/// Field-like scalar used by the generic (mode-agnostic) operators.
pub trait Scalar: Clone + Debug + PartialOrd + num_traits::Num + Signed {
    const EXACT: bool;

    fn from_integer(v: i64) -> Self;
    fn from_rational(v: &Rational) -> Self;
    fn to_f64(&self) -> f64;

    /// Exact equality for rationals; `FLOAT_REL_TOL` / `FLOAT_ABS_TOL` for floats.
    fn approx_eq(&self, other: &Self) -> bool;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_integer(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_rational(v: &Rational) -> Self {
        v.clone()
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_integer(v: i64) -> Self {
        v as f64
    }

    fn from_rational(v: &Rational) -> Self {
        rational_to_f64(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn approx_eq(&self, other: &Self) -> bool {
        float_close(*self, *other)
    }
}

pub fn float_close(a: f64, b: f64) -> bool {
    let diff = libm::fabs(a - b);
    diff <= FLOAT_ABS_TOL || diff <= FLOAT_REL_TOL * libm::fmax(libm::fabs(a), libm::fabs(b))
}

/// Converts a rational to the nearest-ish f64 without overflowing on huge
/// numerators and denominators.
pub fn rational_to_f64(v: &Rational) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (v.numer().to_f64(), v.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both sides down to 64 significant bits before dividing.
    let nb = v.numer().bits() as i64;
    let db = v.denom().bits() as i64;
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let n = (v.numer() >> ns as usize).to_f64().unwrap_or(0.0);
    let d = (v.denom() >> ds as usize).to_f64().unwrap_or(1.0);
    let exp = (ns - ds) as i32;
    libm::ldexp(n / d, exp)
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `x (x-1) ... (x-r+1)`; `1` when `r == 0`.
pub fn falling_factorial(x: i64, r: u32) -> BigInt {
    (0..r as i64).fold(BigInt::one(), |acc, i| acc * BigInt::from(x - i))
}

/// Pochhammer symbol `(x)_r = x (x+1) ... (x+r-1)`; `1` when `r == 0`.
pub fn rising_factorial(x: i64, r: u32) -> BigInt {
    (0..r as i64).fold(BigInt::one(), |acc, i| acc * BigInt::from(x + i))
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Binomial coefficient `C(n, k)`, zero outside `0 <= k <= n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Binomial coefficient as a signed big integer, convenient for rational work.
pub fn binomial_int(n: u64, k: u64) -> BigInt {
    BigInt::from_biguint(Sign::Plus, binomial(n, k))
}

/// Pascal-row cache `C(m, j)` for `0 <= j <= m <= max`.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    rows: Vec<Vec<BigInt>>,
}

impl BinomialTable {
    pub fn new(max: usize) -> Self {
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(max + 1);
        for m in 0..=max {
            let mut row = Vec::with_capacity(m + 1);
            for j in 0..=m {
                if j == 0 || j == m {
                    row.push(BigInt::one());
                } else {
                    let v = &rows[m - 1][j - 1] + &rows[m - 1][j];
                    row.push(v);
                }
            }
            rows.push(row);
        }
        Self { rows }
    }

    pub fn get(&self, m: usize, j: usize) -> BigInt {
        if j > m {
            BigInt::zero()
        } else {
            self.rows[m][j].clone()
        }
    }

    pub fn get_ref(&self, m: usize, j: usize) -> Option<&BigInt> {
        self.rows.get(m).and_then(|r| r.get(j))
    }
}

pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 32 {
        return (2..=n).map(|i| libm::log(i as f64)).sum();
    }
    libm::lgamma(n as f64 + 1.0)
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// A real number stored as sign and natural log of its magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    /// -1, 0 or +1.
    pub sign: i8,
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0, ln_abs: f64::NEG_INFINITY };
    pub const ONE: SignedLog = SignedLog { sign: 1, ln_abs: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            SignedLog { sign: if v > 0.0 { 1 } else { -1 }, ln_abs: libm::log(libm::fabs(v)) }
        }
    }

    pub fn from_ln(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 {
            Self::ZERO
        } else {
            SignedLog { sign: sign.signum(), ln_abs }
        }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * libm::exp(self.ln_abs),
        }
    }

    pub fn log10_abs(self) -> f64 {
        self.ln_abs / core::f64::consts::LN_10
    }

    pub fn sqrt(self) -> Self {
        debug_assert!(self.sign >= 0);
        SignedLog { sign: self.sign, ln_abs: 0.5 * self.ln_abs }
    }

    pub fn recip(self) -> Self {
        SignedLog { sign: self.sign, ln_abs: -self.ln_abs }
    }

    /// Sum of two non-negative values, computed without leaving log space.
    pub fn add_nonneg(self, other: Self) -> Self {
        debug_assert!(self.sign >= 0 && other.sign >= 0);
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (hi, lo) = if self.ln_abs >= other.ln_abs { (self, other) } else { (other, self) };
        SignedLog { sign: 1, ln_abs: hi.ln_abs + libm::log1p(libm::exp(lo.ln_abs - hi.ln_abs)) }
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;

    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            SignedLog::ZERO
        } else {
            SignedLog { sign: self.sign * rhs.sign, ln_abs: self.ln_abs + rhs.ln_abs }
        }
    }
}

impl PartialOrd for SignedLog {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.ln_abs.partial_cmp(&other.ln_abs),
                _ => other.ln_abs.partial_cmp(&self.ln_abs),
            },
            o => Some(o),
        }
    }
}

/// Parses `"p/q"`, integers, decimals (`"0.01"`) and scientific notation
/// (`"1e-10"`) into an exact rational. Decimal input is taken literally, so
/// `"0.1"` is exactly `1/10`.
pub fn parse_rational(input: &str) -> Result<Rational, Error> {
    let s = input.trim();
    let bad = || Error::Parse(alloc::format!("not a rational number: `{input}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(alloc::format!("zero denominator in `{input}`")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut all = String::with_capacity(whole.len() + frac.len());
    all.push_str(whole);
    all.push_str(frac);
    let numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let scale = exponent - frac.len() as i64;
    if scale.unsigned_abs() > 100_000 {
        return Err(bad());
    }
    let ten = BigInt::from(10u32);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * pow)
    } else {
        Rational::new(numer, pow)
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Formats a rational as `"p/q"` (or `"p"` for integers).
pub fn format_rational(v: &Rational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        alloc::format!("{}/{}", v.numer(), v.denom())
    }
}

/// Certified lower bound on `exp(-x)` for rational `x >= 0`.
///
/// Range reduction by `2^m`, an alternating Taylor polynomial truncated after
/// a negative term, then `m` squarings each rounded down to `2^-precision`.
pub fn exp_neg_lower_bound(x: &Rational, precision_bits: u32) -> Rational {
    exp_neg_bound(x, precision_bits, true)
}

/// Certified upper bound on `exp(-x)` for rational `x >= 0`.
pub fn exp_neg_upper_bound(x: &Rational, precision_bits: u32) -> Rational {
    exp_neg_bound(x, precision_bits, false)
}

fn exp_neg_bound(x: &Rational, precision_bits: u32, lower: bool) -> Rational {
    assert!(!x.is_negative(), "exp bound expects x >= 0");
    if x.is_zero() {
        return Rational::one();
    }
    let half = rat(1, 2);
    let mut m = 0u32;
    let mut y = x.clone();
    while y > half {
        y /= int(2);
        m += 1;
    }
    // Terms (-y)^j / j!; truncating after an odd j gives a lower bound,
    // after an even j an upper bound (alternating, decreasing for y <= 1/2).
    let last = if lower { 21 } else { 22 };
    let mut term = Rational::one();
    let mut sum = Rational::one();
    for j in 1..=last {
        term = -(term * &y) / int(j);
        sum += &term;
    }
    let scale = Rational::from_integer(BigInt::one() << precision_bits as usize);
    let round = |v: Rational| -> Rational {
        let scaled = v * &scale;
        let q = if lower { scaled.floor() } else { scaled.ceil() };
        q / &scale
    };
    let mut acc = round(sum);
    for _ in 0..m {
        acc = round(&acc * &acc);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(5, 0), BigInt::from(1));
        assert_eq!(falling_factorial(5, 2), BigInt::from(5 * 4));
        assert_eq!(falling_factorial(2, 3), BigInt::from(0));
        assert_eq!(falling_factorial(-2, 2), BigInt::from(6));
        assert_eq!(rising_factorial(3, 3), BigInt::from(3 * 4 * 5));
        assert_eq!(rising_factorial(-4, 2), BigInt::from(12));
    }

    #[test]
    fn binomials_agree_with_pascal() {
        let table = BinomialTable::new(30);
        for m in 0..=30u64 {
            for j in 0..=m + 1 {
                assert_eq!(table.get(m as usize, j as usize), binomial_int(m, j));
            }
        }
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("1/100").unwrap(), rat(1, 100));
        assert_eq!(parse_rational("0.01").unwrap(), rat(1, 100));
        assert_eq!(parse_rational("1e-10").unwrap(), rat(1, 10_000_000_000));
        assert_eq!(parse_rational("-2.5").unwrap(), rat(-5, 2));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert_eq!(format_rational(&rat(6, 4)), "3/2");
        assert_eq!(format_rational(&int(-7)), "-7");
    }

    #[test]
    fn exp_bounds_bracket_libm() {
        for (p, q) in [(0, 1), (1, 8), (1, 2), (3, 1), (25, 2), (100, 1), (1, 1000)] {
            let x = rat(p, q);
            let lo = rational_to_f64(&exp_neg_lower_bound(&x, 200));
            let hi = rational_to_f64(&exp_neg_upper_bound(&x, 200));
            let e = libm::exp(-(p as f64) / q as f64);
            assert!(lo <= e * (1.0 + 1e-14), "{p}/{q}: {lo} > {e}");
            assert!(hi >= e * (1.0 - 1e-14), "{p}/{q}: {hi} < {e}");
            assert!((hi - lo) <= 1e-12 * e + 1e-300, "{p}/{q}: loose bracket");
        }
        let x = rat(1, 8);
        assert!(exp_neg_lower_bound(&x, 128) <= exp_neg_upper_bound(&x, 128));
    }

    #[test]
    fn rational_to_f64_handles_huge_parts() {
        let big = Rational::new(binomial_int(400, 200) * BigInt::from(3), binomial_int(400, 200));
        assert_eq!(rational_to_f64(&big), 3.0);
        let tiny = Rational::new(num_traits::pow(BigInt::from(3), 1000), num_traits::pow(BigInt::from(2), 2500));
        let expect = 1000.0 * libm::log(3.0) - 2500.0 * core::f64::consts::LN_2;
        assert!((libm::log(rational_to_f64(&tiny)) - expect).abs() < 1e-9);
    }

    #[test]
    fn signed_log_ordering_and_sum() {
        let a = SignedLog::from_f64(2.0);
        let b = SignedLog::from_f64(-3.0);
        assert!(b < SignedLog::ZERO && SignedLog::ZERO < a);
        assert!((a.add_nonneg(SignedLog::from_f64(3.0)).to_f64() - 5.0).abs() < 1e-12);
        assert!(((a * b).to_f64() + 6.0).abs() < 1e-12);
    }
}
