//! Rational numbers that stay in machine words while they fit.
//!
//! Simplex tableaux over small integer data mostly hold fractions with a few
//! dozen bits; `Q::Small` handles those with `i128` intermediates and falls
//! back to [`Rational`] on overflow. Values are always kept in canonical form
//! (reduced, positive denominator, `Small` whenever both parts fit `i64`).

use core::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::Rational;

#[derive(Debug, Clone)]
pub(crate) enum Q {
    Small(i64, i64),
    Big(Rational),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    if a <= u64::MAX as u128 && b <= u64::MAX as u128 {
        return gcd_u64(a as u64, b as u64) as u128;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            core::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            core::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl Q {
    pub(crate) const ZERO: Q = Q::Small(0, 1);
    pub(crate) const ONE: Q = Q::Small(1, 1);

    /// `n / d` for `d != 0`.
    fn from_i128(mut n: i128, mut d: i128) -> Q {
        debug_assert!(d != 0);
        if n == 0 {
            return Q::ZERO;
        }
        if d < 0 {
            // i128::MIN cannot occur: operands are products of i64 values.
            n = -n;
            d = -d;
        }
        let g = gcd_u128(n.unsigned_abs(), d as u128) as i128;
        if g > 1 {
            n /= g;
            d /= g;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Q::Small(n, d),
            _ => Q::Big(Rational::new_raw(BigInt::from(n), BigInt::from(d))),
        }
    }

    fn from_big(v: Rational) -> Q {
        match (v.numer().to_i64(), v.denom().to_i64()) {
            (Some(n), Some(d)) => Q::Small(n, d),
            _ => Q::Big(v),
        }
    }

    pub(crate) fn from_rational(v: &Rational) -> Q {
        Q::from_big(v.clone())
    }

    pub(crate) fn to_rational(&self) -> Rational {
        match self {
            Q::Small(n, d) => Rational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Q::Big(v) => v.clone(),
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        match self {
            Q::Small(n, _) => *n == 0,
            Q::Big(v) => v.is_zero(),
        }
    }

    pub(crate) fn is_positive(&self) -> bool {
        match self {
            Q::Small(n, _) => *n > 0,
            Q::Big(v) => v.is_positive(),
        }
    }

    pub(crate) fn is_negative(&self) -> bool {
        match self {
            Q::Small(n, _) => *n < 0,
            Q::Big(v) => v.is_negative(),
        }
    }

    pub(crate) fn is_one(&self) -> bool {
        matches!(self, Q::Small(1, 1))
    }

    pub(crate) fn neg(&self) -> Q {
        match self {
            Q::Small(n, d) => Q::from_i128(-(*n as i128), *d as i128),
            Q::Big(v) => Q::from_big(-v.clone()),
        }
    }

    pub(crate) fn recip(&self) -> Q {
        match self {
            Q::Small(n, d) => Q::from_i128(*d as i128, *n as i128),
            Q::Big(v) => Q::from_big(v.recip()),
        }
    }

    pub(crate) fn mul(&self, other: &Q) -> Q {
        match (self, other) {
            (Q::Small(a, b), Q::Small(c, d)) => Q::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128),
            _ => Q::from_big(self.to_rational() * other.to_rational()),
        }
    }

    pub(crate) fn div(&self, other: &Q) -> Q {
        self.mul(&other.recip())
    }

    pub(crate) fn add(&self, other: &Q) -> Q {
        match (self, other) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                if b == d {
                    Q::from_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    Q::from_i128(*a as i128 * *d as i128 + *c as i128 * *b as i128, *b as i128 * *d as i128)
                }
            }
            _ => Q::from_big(self.to_rational() + other.to_rational()),
        }
    }

    pub(crate) fn sub(&self, other: &Q) -> Q {
        self.add(&other.neg())
    }

    /// `self - f * x`.
    pub(crate) fn sub_mul(&self, f: &Q, x: &Q) -> Q {
        self.sub(&f.mul(x))
    }
}

impl PartialEq for Q {
    fn eq(&self, other: &Q) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Q {}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Q) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Q {
    fn cmp(&self, other: &Q) -> Ordering {
        match (self, other) {
            (Q::Small(a, b), Q::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_rational().cmp(&other.to_rational()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn q(n: i64, d: i64) -> Q {
        Q::from_rational(&rat(n, d))
    }

    #[test]
    fn small_arithmetic_matches_rational() {
        let vals = [(1, 3), (-2, 7), (5, 1), (0, 1), (i64::MAX / 3, 5), (-7, i64::MAX / 11)];
        for &(a, b) in &vals {
            for &(c, d) in &vals {
                let (x, y) = (q(a, b), q(c, d));
                let (rx, ry) = (rat(a, b), rat(c, d));
                assert_eq!(x.add(&y).to_rational(), &rx + &ry);
                assert_eq!(x.sub(&y).to_rational(), &rx - &ry);
                assert_eq!(x.mul(&y).to_rational(), &rx * &ry);
                if !ry.is_zero() {
                    assert_eq!(x.div(&y).to_rational(), &rx / &ry);
                }
                assert_eq!(x.cmp(&y), rx.cmp(&ry));
            }
        }
    }

    #[test]
    fn overflow_promotes_and_shrinks_back() {
        let big = q(i64::MAX, 1).mul(&q(i64::MAX, 1));
        assert!(matches!(big, Q::Big(_)));
        let back = big.div(&q(i64::MAX, 1));
        assert!(matches!(back, Q::Small(_, _)));
        assert_eq!(back.to_rational(), int(i64::MAX));
        assert!(q(-3, 4).is_negative() && q(3, 4).is_positive() && Q::ONE.is_one());
        assert_eq!(gcd_u128(1 << 100, 3 << 90), 1 << 90);
    }
}
