//! The advantage bound
//! `sqrt(n+1) exp(-E_{n,t,s}) + delta sqrt(2(s+1)) 2^s`
//! for symmetric `(k, delta)`-wise indistinguishable pairs observed on `t`
//! bits, valid for every `0 <= s <= k < t < n`. Both terms are evaluated in
//! log space so they stay representable for `n` far beyond f64 range.

use core::f64::consts::LN_2;

use crate::arith::{rational_to_f64, Mode, SignedLog};
use crate::error::{ensure, Result};
use crate::hahn::{exponent_e, exponent_e_exact};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub n: usize,
    pub t: usize,
    pub k: usize,
    pub s: usize,
    pub delta: f64,
}

impl BoundParams {
    pub fn new(n: usize, t: usize, k: usize, s: usize, delta: f64) -> Result<Self> {
        check_order(n, t, k, delta)?;
        ensure!(s <= k, "s <= k violated (s = {s}, k = {k})");
        Ok(Self { n, t, k, s, delta })
    }
}

fn check_order(n: usize, t: usize, k: usize, delta: f64) -> Result<()> {
    ensure!(k < t, "k < t violated (k = {k}, t = {t})");
    ensure!(t < n, "t < n violated (t = {t}, n = {n})");
    ensure!((0.0..=1.0).contains(&delta), "0 <= delta <= 1 violated (delta = {delta})");
    Ok(())
}

/// Bound value with its two additive terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    /// `sqrt(n+1) exp(-E_{n,t,s})`.
    pub term1: SignedLog,
    /// `delta sqrt(2(s+1)) 2^s`.
    pub term2: SignedLog,
    pub total: SignedLog,
}

impl BoundValue {
    /// Raw bound; may exceed 1 and may be `inf` when the delta term
    /// overflows.
    pub fn raw(&self) -> f64 {
        self.total.to_f64()
    }

    /// `min(bound, 1)`: an advantage never exceeds 1.
    pub fn clipped(&self) -> f64 {
        if self.total.ln_abs >= 0.0 {
            1.0
        } else {
            self.total.to_f64()
        }
    }

    pub fn ln_total(&self) -> f64 {
        self.total.ln_abs
    }
}

fn combine(ln_term1: f64, p: &BoundParams) -> BoundValue {
    let term1 = SignedLog::from_ln(1, ln_term1);
    let term2 = if p.delta == 0.0 {
        SignedLog::ZERO
    } else {
        let ln = libm::log(p.delta) + 0.5 * libm::log(2.0 * (p.s + 1) as f64) + p.s as f64 * LN_2;
        SignedLog::from_ln(1, ln)
    };
    BoundValue { term1, term2, total: term1.add_nonneg(term2) }
}

pub fn theorem_bound(p: &BoundParams) -> Result<BoundValue> {
    theorem_bound_in(p, Mode::Float)
}

/// In exact mode the exponent `E` is formed as a rational and rounded once.
pub fn theorem_bound_in(p: &BoundParams, mode: Mode) -> Result<BoundValue> {
    check_order(p.n, p.t, p.k, p.delta)?;
    ensure!(p.s <= p.k, "s <= k violated (s = {}, k = {})", p.s, p.k);
    let e = match mode {
        Mode::Float => exponent_e(p.n, p.t, p.s)?,
        Mode::Exact => rational_to_f64(&exponent_e_exact(p.n, p.t, p.s)?),
    };
    Ok(combine(0.5 * libm::log((p.n + 1) as f64) - e, p))
}

/// Scans `s = 0..=k` for the smallest bound; ties go to the smaller `s`.
pub fn best_s(n: usize, t: usize, k: usize, delta: f64) -> Result<(usize, BoundValue)> {
    check_order(n, t, k, delta)?;
    let mut best: Option<(usize, BoundValue)> = None;
    for s in 0..=k {
        let value = theorem_bound(&BoundParams { n, t, k, s, delta })?;
        match best {
            Some((_, b)) if value.ln_total() >= b.ln_total() => {}
            _ => best = Some((s, value)),
        }
    }
    Ok(best.expect("k >= 0 gives at least one candidate"))
}
