//! Maximal `t`-wise advantage over symmetric `(k, delta)`-wise
//! indistinguishable pairs, by linear programming.
//!
//! For a fixed test `c` in `{-1,+1}^{t+1}` the best pair is an LP over the
//! weight vectors `u, v` of the two distributions:
//!
//! ```text
//! maximize   (1/2) c . M_t (u - v)
//! subject to sum u = sum v = 1,   sum_j |(M_k (u - v))_j| <= 2 delta
//! ```
//!
//! with the absolute values split through auxiliary `e_j`. The advantage is
//! the maximum over all tests, which [`AdvantageProblem`] enumerates in Gray
//! code order so consecutive LPs differ in one objective sign and reuse the
//! previous basis. Since swapping the pair negates the objective, `c_0 = +1`
//! is fixed without loss, and reflecting weights `x -> n - x` halves the
//! remaining tests again.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{binomial_int, rational_to_f64, BinomialTable, Rational};
use crate::bound::{best_s, theorem_bound, BoundParams, BoundValue};
use crate::distributions::{half_l1, is_k_delta_indistinguishable, stat_distance_with, SymmetricDistribution};
use crate::error::{ensure, Error, Result};
use crate::simplex::{LpInstance, LpSolution, Sense, Simplex};
use crate::smoothing::SmoothingMatrix;

/// Largest `t` the exact mode accepts unless overridden.
pub const DEFAULT_T_MAX: usize = 14;

/// Alternation rounds per heuristic restart.
pub const MAX_ALTERNATIONS: usize = 64;

/// Sign vectors are split into `2^CHUNK_BITS` chunks (fewer when `t` is
/// small). The split is fixed so parallel and sequential runs agree.
pub const CHUNK_BITS: usize = 4;

/// Sandwich tolerance: oracle advantage must not exceed the bound by more.
pub const SANDWICH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Exact,
    Heuristic,
}

impl OracleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            OracleMode::Exact => "exact",
            OracleMode::Heuristic => "heuristic",
        }
    }
}

impl core::str::FromStr for OracleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(OracleMode::Exact),
            "heuristic" => Ok(OracleMode::Heuristic),
            other => Err(Error::Parse(alloc::format!("unknown oracle mode `{other}` (expected exact or heuristic)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleStats {
    pub lps_solved: u64,
    pub pivots: u64,
    /// Exact mode: number of test chunks processed.
    pub chunks: usize,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    /// Heuristic mode: total alternation rounds over all restarts.
    pub alternations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub delta: Rational,
    pub advantage: Rational,
    pub witness_mu: SymmetricDistribution,
    pub witness_nu: SymmetricDistribution,
    /// `+1` where the test accepts on observed weight `a`, `-1` otherwise.
    pub witness_test: Vec<i8>,
    pub mode: OracleMode,
    pub stats: OracleStats,
}

/// The LP family for one `(n, k, t, delta)`.
///
/// Constraint rows are scaled by `C(n,k)` and objectives by `2 C(n,t)` so all
/// coefficients are integers.
#[derive(Debug, Clone)]
pub struct AdvantageProblem {
    n: usize,
    k: usize,
    t: usize,
    delta: Rational,
    instance: LpInstance,
    /// `C(x,a) C(n-x,t-a)`, row-major `(n+1) x (t+1)`.
    observe: Vec<BigInt>,
    objective_scale: Rational,
    kernel_t: SmoothingMatrix<Rational>,
}

/// Best test found in one chunk of the exact enumeration.
#[derive(Debug, Clone)]
pub struct ChunkOutcome {
    pub chunk: usize,
    best: Option<(Rational, Vec<i8>, LpSolution)>,
    pub lps_solved: u64,
    pub pivots: u64,
}

impl ChunkOutcome {
    pub fn value(&self) -> Option<&Rational> {
        self.best.as_ref().map(|b| &b.0)
    }
}

impl AdvantageProblem {
    pub fn new(n: usize, k: usize, t: usize, delta: &Rational) -> Result<Self> {
        ensure!(n >= 1, "n >= 1 required");
        ensure!(t >= 1 && t <= n, "1 <= t <= n violated (t = {t}, n = {n})");
        ensure!(k <= n, "k <= n violated (k = {k}, n = {n})");
        ensure!(!delta.is_negative() && *delta <= Rational::one(), "0 <= delta <= 1 violated");
        let binom = BinomialTable::new(n);
        let pick = |x: usize, a: usize, m: usize| -> BigInt {
            if a > x || m - a > n - x {
                BigInt::zero()
            } else {
                binom.get(x, a) * binom.get(n - x, m - a)
            }
        };
        let with_slack = !delta.is_zero();
        let np = n + 1;
        let nv = 2 * np + if with_slack { k + 1 } else { 0 };
        let mut inst = LpInstance::new(nv);
        for side in 0..2 {
            let mut row = vec![Rational::zero(); nv];
            row[side * np..(side + 1) * np].iter_mut().for_each(|c| *c = Rational::one());
            inst.add_constraint(row, Sense::Eq, Rational::one());
        }
        for j in 0..=k {
            let mut row = vec![Rational::zero(); nv];
            for x in 0..=n {
                let c = Rational::from_integer(pick(x, j, k));
                row[np + x] = -c.clone();
                row[x] = c;
            }
            if with_slack {
                // (M_k d)_j <= e_j and -(M_k d)_j <= e_j, e scaled by C(n,k)
                let mut neg: Vec<Rational> = row.iter().map(|c| -c.clone()).collect();
                row[2 * np + j] = -Rational::one();
                neg[2 * np + j] = -Rational::one();
                inst.add_constraint(row, Sense::Le, Rational::zero());
                inst.add_constraint(neg, Sense::Le, Rational::zero());
            } else {
                inst.add_constraint(row, Sense::Eq, Rational::zero());
            }
        }
        if with_slack {
            let mut row = vec![Rational::zero(); nv];
            row[2 * np..].iter_mut().for_each(|c| *c = Rational::one());
            let budget = delta * Rational::from_integer(binomial_int(n as u64, k as u64)) * Rational::from_integer(2.into());
            inst.add_constraint(row, Sense::Le, budget);
        }
        let mut observe = Vec::with_capacity(np * (t + 1));
        for x in 0..=n {
            for a in 0..=t {
                observe.push(pick(x, a, t));
            }
        }
        let objective_scale = Rational::new(BigInt::one(), binomial_int(n as u64, t as u64) * BigInt::from(2));
        Ok(Self {
            n,
            k,
            t,
            delta: delta.clone(),
            instance: inst,
            observe,
            objective_scale,
            kernel_t: SmoothingMatrix::exact(n, t)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn instance(&self) -> &LpInstance {
        &self.instance
    }

    /// Number of chunks in the exact enumeration.
    pub fn num_chunks(&self) -> usize {
        1 << CHUNK_BITS.min(self.t)
    }

    fn objective(&self, c: &[i8]) -> Vec<Rational> {
        let np = self.n + 1;
        let mut obj = vec![Rational::zero(); self.instance.num_vars];
        for x in 0..=self.n {
            let row = &self.observe[x * (self.t + 1)..(x + 1) * (self.t + 1)];
            let v: BigInt = row.iter().zip(c).map(|(m, &s)| if s > 0 { m.clone() } else { -m.clone() }).sum();
            obj[np + x] = Rational::from_integer(-v.clone());
            obj[x] = Rational::from_integer(v);
        }
        obj
    }

    fn simplex(&self) -> Result<Simplex> {
        // The pair mu = nu is always feasible.
        Simplex::new(&self.instance).map_err(|e| match e {
            Error::Infeasible => Error::Soundness(String::from("advantage LP reported infeasible")),
            e => e,
        })
    }

    fn solve(&self, lp: &mut Simplex, c: &[i8]) -> Result<LpSolution> {
        let mut sol = lp.optimize(&self.objective(c)).map_err(|e| match e {
            Error::Unbounded => Error::Soundness(String::from("advantage LP reported unbounded")),
            e => e,
        })?;
        sol.value *= &self.objective_scale;
        Ok(sol)
    }

    /// Enumerates the tests of one chunk. The top `CHUNK_BITS` signs are the
    /// chunk index, the rest run through a Gray code. Stops early at value 1.
    pub fn solve_chunk(&self, chunk: usize) -> Result<ChunkOutcome> {
        ensure!(chunk < self.num_chunks(), "chunk {chunk} out of range");
        let fixed_bits = CHUNK_BITS.min(self.t);
        let free_bits = self.t - fixed_bits;
        let mut c = vec![1i8; self.t + 1];
        for b in 0..fixed_bits {
            if chunk >> b & 1 == 1 {
                c[1 + free_bits + b] = -1;
            }
        }
        let mut lp = self.simplex()?;
        let mut best: Option<(Rational, Vec<i8>, LpSolution)> = None;
        for i in 0u64..(1u64 << free_bits) {
            if i > 0 {
                let flip = i.trailing_zeros() as usize;
                c[1 + flip] = -c[1 + flip];
            }
            if !is_canonical(&c) {
                continue;
            }
            let sol = self.solve(&mut lp, &c)?;
            let improves = best.as_ref().is_none_or(|b| sol.value > b.0);
            if improves {
                let done = sol.value.is_one();
                best = Some((sol.value.clone(), c.clone(), sol));
                if done {
                    break;
                }
            }
        }
        let stats = lp.stats();
        Ok(ChunkOutcome { chunk, best, lps_solved: stats.solves, pivots: stats.pivots })
    }

    /// Merges chunk outcomes: the largest value wins, ties go to the lowest
    /// chunk. Chunks after the first one reaching 1 are ignored, matching a
    /// sequential run that stops there.
    pub fn finish(&self, mut outcomes: Vec<ChunkOutcome>) -> Result<OracleResult> {
        outcomes.sort_by_key(|o| o.chunk);
        let mut stats = OracleStats::default();
        let mut best: Option<&(Rational, Vec<i8>, LpSolution)> = None;
        for o in &outcomes {
            stats.chunks += 1;
            stats.lps_solved += o.lps_solved;
            stats.pivots += o.pivots;
            if let Some(b) = &o.best {
                if best.is_none_or(|cur| b.0 > cur.0) {
                    best = Some(b);
                }
            }
            if o.value().is_some_and(One::is_one) {
                break;
            }
        }
        let (value, test, sol) = best.ok_or_else(|| Error::Soundness(String::from("no chunk produced a solution")))?;
        let (mu, nu) = self.witness(sol)?;
        let achieved = stat_distance_with(&mu, &nu, &self.kernel_t)?;
        if achieved != *value {
            return Err(Error::Soundness(alloc::format!(
                "witness distance {achieved} differs from LP optimum {value}"
            )));
        }
        Ok(self.result(value.clone(), mu, nu, test.clone(), OracleMode::Exact, stats))
    }

    fn witness(&self, sol: &LpSolution) -> Result<(SymmetricDistribution, SymmetricDistribution)> {
        let np = self.n + 1;
        let mu = SymmetricDistribution::new(sol.x[..np].to_vec())?;
        let nu = SymmetricDistribution::new(sol.x[np..2 * np].to_vec())?;
        Ok((mu, nu))
    }

    fn result(
        &self,
        advantage: Rational,
        witness_mu: SymmetricDistribution,
        witness_nu: SymmetricDistribution,
        witness_test: Vec<i8>,
        mode: OracleMode,
        stats: OracleStats,
    ) -> OracleResult {
        OracleResult {
            n: self.n,
            k: self.k,
            t: self.t,
            delta: self.delta.clone(),
            advantage,
            witness_mu,
            witness_nu,
            witness_test,
            mode,
            stats,
        }
    }

    /// Sign of `M_t (u - v)` per observed weight; zeros keep `previous`.
    fn best_response(&self, mu: &SymmetricDistribution, nu: &SymmetricDistribution, previous: &[i8]) -> (Vec<i8>, Rational) {
        let p = self.kernel_t.project_unchecked(mu.weights());
        let q = self.kernel_t.project_unchecked(nu.weights());
        let c = p
            .iter()
            .zip(&q)
            .zip(previous)
            .map(|((a, b), &prev)| match a.cmp(b) {
                core::cmp::Ordering::Greater => 1,
                core::cmp::Ordering::Less => -1,
                core::cmp::Ordering::Equal => prev,
            })
            .collect();
        (c, half_l1(&p, &q))
    }
}

/// Reflecting weights `x -> n - x` maps a feasible pair to a feasible pair
/// and reverses the test, so only one of `c` and its (sign-normalized)
/// reversal needs an LP.
fn is_canonical(c: &[i8]) -> bool {
    let flip = c[c.len() - 1];
    c.iter().zip(c.iter().rev()).map(|(&a, &b)| (a, b * flip)).find(|(a, b)| a != b).is_none_or(|(a, b)| a < b)
}

/// Exact maximal advantage, enumerating every test.
pub fn max_advantage_exact(n: usize, k: usize, t: usize, delta: &Rational) -> Result<OracleResult> {
    max_advantage_exact_with(n, k, t, delta, DEFAULT_T_MAX)
}

pub fn max_advantage_exact_with(n: usize, k: usize, t: usize, delta: &Rational, t_max: usize) -> Result<OracleResult> {
    if t > t_max {
        return Err(Error::ExactLimit { t, t_max });
    }
    let problem = AdvantageProblem::new(n, k, t, delta)?;
    let mut outcomes = Vec::new();
    for chunk in 0..problem.num_chunks() {
        let o = problem.solve_chunk(chunk)?;
        let done = o.value().is_some_and(One::is_one);
        outcomes.push(o);
        if done {
            break;
        }
    }
    problem.finish(outcomes)
}

/// Alternating maximization from `restarts` random tests. The result is a
/// certified lower bound: the witness pair is feasible and its distance is
/// computed exactly.
pub fn max_advantage_heuristic(
    n: usize,
    k: usize,
    t: usize,
    delta: &Rational,
    restarts: usize,
    seed: u64,
) -> Result<OracleResult> {
    ensure!(restarts >= 1, "restarts >= 1 required");
    let problem = AdvantageProblem::new(n, k, t, delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<i8>> = (0..restarts)
        .map(|_| {
            let mut c: Vec<i8> = (0..=t).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            // a constant test has zero advantage and would never move
            if c.iter().all(|&s| s == c[0]) {
                c[t] = -c[t];
            }
            c
        })
        .collect();
    let mut lp = problem.simplex()?;
    let mut stats = OracleStats { restarts: Some(restarts), seed: Some(seed), ..OracleStats::default() };
    let mut best: Option<(Rational, Vec<i8>, SymmetricDistribution, SymmetricDistribution)> = None;
    for start in starts {
        let mut c = start;
        let mut current: Option<(Rational, Vec<i8>, SymmetricDistribution, SymmetricDistribution)> = None;
        for _ in 0..MAX_ALTERNATIONS {
            stats.alternations += 1;
            let sol = problem.solve(&mut lp, &c)?;
            let (mu, nu) = problem.witness(&sol)?;
            let (next, distance) = problem.best_response(&mu, &nu, &c);
            let improved = current.as_ref().is_none_or(|cur| distance > cur.0);
            if improved {
                current = Some((distance, next.clone(), mu, nu));
            }
            if next == c || !improved {
                break;
            }
            c = next;
        }
        if let Some(cur) = current {
            if best.as_ref().is_none_or(|b| cur.0 > b.0) {
                best = Some(cur);
            }
        }
    }
    let lp_stats = lp.stats();
    stats.lps_solved = lp_stats.solves;
    stats.pivots = lp_stats.pivots;
    let (advantage, test, mu, nu) = best.expect("at least one restart ran");
    Ok(problem.result(advantage, mu, nu, test, OracleMode::Heuristic, stats))
}

/// How to run the oracle inside [`sandwich_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleRun {
    Exact { t_max: usize },
    Heuristic { restarts: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub oracle: OracleResult,
    pub s_star: usize,
    pub bound: BoundValue,
    /// Raw bound at `s_star` divided by the advantage; `None` when the
    /// advantage is zero.
    pub gap_ratio: Option<f64>,
}

/// Checks `advantage <= theorem_bound(n,t,k,s,delta) + SANDWICH_TOL` for every
/// `s <= k`. A violation means an implementation bug and is returned as
/// [`Error::Soundness`].
pub fn check_sandwich(result: &OracleResult) -> Result<(usize, BoundValue)> {
    let delta = rational_to_f64(&result.delta);
    let (s_star, bound) = best_s(result.n, result.t, result.k, delta)?;
    let adv = rational_to_f64(&result.advantage);
    for s in 0..=result.k {
        let b = theorem_bound(&BoundParams::new(result.n, result.t, result.k, s, delta)?)?;
        if adv > b.raw() + SANDWICH_TOL {
            return Err(Error::Soundness(alloc::format!(
                "advantage {adv} exceeds bound {} at (n, t, k, s, delta) = ({}, {}, {}, {s}, {delta})",
                b.raw(),
                result.n,
                result.t,
                result.k
            )));
        }
    }
    Ok((s_star, bound))
}

pub fn sandwich_from(oracle: OracleResult) -> Result<SandwichReport> {
    let (s_star, bound) = check_sandwich(&oracle)?;
    let adv = rational_to_f64(&oracle.advantage);
    let gap_ratio = if adv > 0.0 { Some(bound.raw() / adv) } else { None };
    Ok(SandwichReport { oracle, s_star, bound, gap_ratio })
}

/// Oracle value against the bound at the best `s`.
pub fn sandwich_report(n: usize, k: usize, t: usize, delta: &Rational, run: OracleRun) -> Result<SandwichReport> {
    // ordering first, so a rejected instance never pays for the oracle
    best_s(n, t, k, rational_to_f64(delta))?;
    let oracle = match run {
        OracleRun::Exact { t_max } => max_advantage_exact_with(n, k, t, delta, t_max)?,
        OracleRun::Heuristic { restarts, seed } => max_advantage_heuristic(n, k, t, delta, restarts, seed)?,
    };
    sandwich_from(oracle)
}

/// Confirms the witness pair is `(k, delta)`-wise indistinguishable and
/// reproduces the reported advantage.
pub fn verify_witness(result: &OracleResult) -> Result<bool> {
    let ind = is_k_delta_indistinguishable(&result.witness_mu, &result.witness_nu, result.k, &result.delta)?;
    let kernel = SmoothingMatrix::exact(result.n, result.t)?;
    let distance = stat_distance_with(&result.witness_mu, &result.witness_nu, &kernel)?;
    Ok(ind.holds && distance == result.advantage)
}
