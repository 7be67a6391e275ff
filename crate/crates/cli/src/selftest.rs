//! Invariant suite behind `hahnbound selftest`.
//!
//! Each check walks a fixed grid and stops at the first failing tuple, which
//! is reported verbatim. The quick level uses smaller grids; the full level
//! covers the exhaustive rational-mode ranges.

use std::time::Instant;

use hahnbound_core::approximation::{
    remainder_bound_holds_exact, remainder_sup_bound, surrogate_bound_holds_exact, surrogate_sup_bound,
    ExactSurrogateBuilder, SurrogateBuilder,
};
use hahnbound_core::arith::{int, rat, rational_to_f64, Rational};
use hahnbound_core::distributions::{
    brute_force_distance, is_k_delta_indistinguishable, is_k_delta_indistinguishable_brute_force, make_parity_pair,
    stat_distance_t,
};
use hahnbound_core::hahn::{
    damping_bound_holds_exact, lambda_squared, max_norm_ratio, norm_h, norm_h_closed_form, norm_h_unnormalized,
    FloatHahnTable, HahnTable,
};
use hahnbound_core::oracle::{check_sandwich, max_advantage_exact, max_advantage_heuristic, verify_witness};
use hahnbound_core::smoothing::{factorial_moment, intertwining_residual_with, kernel_factorial_moment, SmoothingMatrix};
use hahnbound_core::SymmetricDistribution;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl std::str::FromStr for Level {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(format!("unknown selftest level `{other}` (expected quick or full)")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub level: Level,
    pub seed: u64,
    /// Corrupts one exact Hahn table entry before the orthogonality check;
    /// the suite must then fail.
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub cases: u64,
    pub failure: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub level: Level,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    /// Recorded observations that are not pass/fail criteria.
    pub notes: Vec<String>,
}

struct Grids {
    exact_n: usize,
    float_n: &'static [usize],
    moment_n: usize,
    low_degree_n: usize,
    low_degree_tests: usize,
    low_degree_exact_n: usize,
    distance_n: usize,
    distance_pairs: usize,
    sandwich_n: usize,
    overlap_n: usize,
    overlap_restarts: usize,
}

impl Grids {
    fn for_level(level: Level) -> Self {
        match level {
            Level::Quick => Grids {
                exact_n: 16,
                float_n: &[100, 200],
                moment_n: 12,
                low_degree_n: 16,
                low_degree_tests: 20,
                low_degree_exact_n: 8,
                distance_n: 7,
                distance_pairs: 10,
                sandwich_n: 8,
                overlap_n: 7,
                overlap_restarts: 8,
            },
            Level::Full => Grids {
                exact_n: 40,
                float_n: &[100, 250, 500],
                moment_n: 20,
                low_degree_n: 30,
                low_degree_tests: 200,
                low_degree_exact_n: 12,
                distance_n: 10,
                distance_pairs: 50,
                sandwich_n: 12,
                overlap_n: 10,
                overlap_restarts: 32,
            },
        }
    }
}

type Outcome = Result<u64, String>;

pub fn run(opts: &Options) -> Summary {
    let g = Grids::for_level(opts.level);
    let mut notes = Vec::new();
    let mut checks = Vec::new();
    let mut record = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let seconds = start.elapsed().as_secs_f64();
        let (passed, cases, failure) = match outcome {
            Ok(c) => (true, c, None),
            Err(msg) => (false, 0, Some(msg)),
        };
        checks.push(CheckResult { name, passed, cases, failure, seconds });
    };
    record("orthogonality-exact", &mut || orthogonality_exact(g.exact_n, opts.inject_fault));
    record("orthogonality-float", &mut || orthogonality_float(g.float_n));
    record("norm-closed-form", &mut || norm_closed_form(g.exact_n));
    record("intertwining", &mut || intertwining(g.exact_n));
    record("damping-monotone", &mut || damping_monotone(g.exact_n));
    record("norm-ratio", &mut || norm_ratio(g.exact_n));
    record("factorial-moments", &mut || factorial_moments(g.moment_n));
    record("damping-exponential", &mut || damping_exponential(g.exact_n));
    record("low-degree-float", &mut || low_degree_float(g.low_degree_n, g.low_degree_tests, opts.seed));
    record("low-degree-exact", &mut || low_degree_exact(g.low_degree_exact_n, opts.seed));
    record("distance-vs-enumeration", &mut || distance_equivalence(g.distance_n, g.distance_pairs, opts.seed));
    record("parity-fixture", &mut || parity_fixture(10));
    record("sandwich", &mut || sandwich(g.sandwich_n));
    let mut overlap_note = None;
    record("heuristic-below-exact", &mut || {
        let (cases, equal) = heuristic_overlap(g.overlap_n, g.overlap_restarts, opts.seed)?;
        overlap_note = Some(format!(
            "heuristic matched exact on {equal} of {cases} instances ({:.1}%, {} restarts)",
            100.0 * equal as f64 / cases.max(1) as f64,
            g.overlap_restarts
        ));
        Ok(cases)
    });
    notes.extend(overlap_note);
    let passed = checks.iter().all(|c| c.passed);
    Summary { level: opts.level, seed: opts.seed, passed, checks, notes }
}

fn orthogonality_exact(max_n: usize, inject_fault: bool) -> Outcome {
    let mut cases = 0;
    for n in 1..=max_n {
        let mut table = HahnTable::new(n);
        if inject_fault && n == 4 {
            let corrupted = table.q(2, 1) + Rational::one();
            table.set_q(2, 1, corrupted);
        }
        for r in 0..=n {
            for s in r..=n {
                let g = table.gram(r, s);
                let expect = if r == s { norm_h_unnormalized(n, r).map_err(|e| e.to_string())? } else { int(0) };
                if g != expect {
                    return Err(format!("n={n} r={r} s={s}: sum_x Q_r Q_s = {g}, expected {expect}"));
                }
                cases += 1;
            }
        }
    }
    Ok(cases)
}

fn orthogonality_float(ns: &[usize]) -> Outcome {
    let mut cases = 0;
    for &n in ns {
        let table = FloatHahnTable::new(n);
        for r in 0..=n {
            for s in r..=n {
                let target = if r == s { 1.0 } else { 0.0 };
                let residual = (table.inner(r, s) - target).abs();
                if residual > 1e-9 {
                    return Err(format!("n={n} r={r} s={s}: residual {residual:e}"));
                }
                cases += 1;
            }
        }
    }
    Ok(cases)
}

fn norm_closed_form(max_n: usize) -> Outcome {
    let mut cases = 0;
    for n in 0..=max_n {
        for r in 0..=n {
            let a = norm_h(n, r).map_err(|e| e.to_string())?;
            let b = norm_h_closed_form(n, r).map_err(|e| e.to_string())?;
            if a != b {
                return Err(format!("n={n} r={r}: product {a} vs factorial {b}"));
            }
            cases += 1;
        }
    }
    Ok(cases)
}

fn intertwining(max_n: usize) -> Outcome {
    let tables: Vec<HahnTable> = (0..=max_n).map(HahnTable::new).collect();
    let per_n: Vec<Outcome> = (2..=max_n)
        .into_par_iter()
        .map(|n| {
            let mut cases = 0;
            for t in 1..n {
                let m = SmoothingMatrix::exact(n, t).map_err(|e| e.to_string())?;
                for r in 0..=t {
                    let residual = intertwining_residual_with(&m, &tables[t], &tables[n], r);
                    if !residual.is_zero() {
                        return Err(format!("n={n} t={t} r={r}: residual {residual}"));
                    }
                    cases += 1;
                }
            }
            Ok(cases)
        })
        .collect();
    sum_outcomes(per_n)
}

fn sum_outcomes(parts: Vec<Outcome>) -> Outcome {
    parts.into_iter().try_fold(0, |acc, o| o.map(|c| acc + c))
}

fn damping_monotone(max_n: usize) -> Outcome {
    let mut cases = 0;
    for n in 2..=max_n {
        for t in 1..n {
            for r in 0..t {
                let hi = lambda_squared(n, t, r).map_err(|e| e.to_string())?;
                let lo = lambda_squared(n, t, r + 1).map_err(|e| e.to_string())?;
                if lo >= hi {
                    return Err(format!("n={n} t={t} r={r}: lambda does not decrease"));
                }
                cases += 1;
            }
        }
    }
    Ok(cases)
}

fn norm_ratio(max_t: usize) -> Outcome {
    let mut cases = 0;
    for t in 0..=max_t {
        for s in 0..=t {
            let (r, ratio) = max_norm_ratio(s, t).map_err(|e| e.to_string())?;
            let at_s = norm_h(s, s).map_err(|e| e.to_string())? / norm_h(t, s).map_err(|e| e.to_string())?;
            let cap = Rational::from_integer(BigInt::one() << (2 * s + 1));
            // The maximum may tie at several r; its value must be attained at r = s.
            if ratio != at_s || ratio > cap {
                return Err(format!("t={t} s={s} r={r}: H_s/H_t = {ratio}"));
            }
            cases += 1;
        }
    }
    Ok(cases)
}

/// Tallies, for every `t` and `k`, the observed weight over all `t`-subsets
/// of an `n`-set whose first `k` elements are ones.
fn subset_tallies(n: usize) -> Vec<Vec<Vec<u64>>> {
    let mut counts = vec![vec![vec![0u64; n + 1]; n + 1]; n + 1];
    for mask in 0u32..(1u32 << n) {
        let t = mask.count_ones() as usize;
        for (k, by_k) in counts[t].iter_mut().enumerate() {
            let low = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
            by_k[(mask & low).count_ones() as usize] += 1;
        }
    }
    counts
}

fn factorial_moments(max_n: usize) -> Outcome {
    let mut cases = 0;
    for n in 1..=max_n {
        let tallies = subset_tallies(n);
        for t in 0..=n {
            let m = SmoothingMatrix::exact(n, t).map_err(|e| e.to_string())?;
            let total: u64 = tallies[t][0].iter().sum();
            for k in 0..=n {
                for l in 0..=t {
                    let brute: Rational = tallies[t][k]
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c > 0)
                        .map(|(a, &c)| {
                            let falling: i64 = (0..l).map(|i| a as i64 - i as i64).product();
                            Rational::new(BigInt::from(c) * falling, BigInt::from(total))
                        })
                        .sum();
                    let formula = factorial_moment(n, t, k, l).map_err(|e| e.to_string())?;
                    if formula != brute || kernel_factorial_moment(&m, k, l) != brute {
                        return Err(format!("n={n} t={t} k={k} l={l}: moment {formula} vs enumeration {brute}"));
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(cases)
}

fn damping_exponential(max_n: usize) -> Outcome {
    let mut cases = 0;
    for n in 2..=max_n {
        for t in 1..n {
            for r in 1..=t {
                if !damping_bound_holds_exact(n, t, r).map_err(|e| e.to_string())? {
                    return Err(format!("n={n} t={t} r={r}: lambda exceeds its exponential bound"));
                }
                cases += 1;
            }
        }
    }
    Ok(cases)
}

/// Random test with values in `[-1, 1]`: independent signs or independent
/// uniform reals, alternating.
fn random_float_test(rng: &mut ChaCha8Rng, len: usize, signs: bool) -> Vec<f64> {
    if signs {
        (0..len).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
    } else {
        (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect()
    }
}

fn point_seed(seed: u64, n: usize, t: usize, s: usize) -> u64 {
    seed ^ ((n as u64) << 40) ^ ((t as u64) << 20) ^ s as u64
}

fn low_degree_float(max_n: usize, tests: usize, seed: u64) -> Outcome {
    let points: Vec<(usize, usize, usize)> =
        (2..=max_n).flat_map(|n| (1..n).flat_map(move |t| (0..t).map(move |s| (n, t, s)))).collect();
    let parts: Vec<Outcome> = points
        .par_iter()
        .map(|&(n, t, s)| {
            let builder = SurrogateBuilder::new(n, t, s).map_err(|e| e.to_string())?;
            let h_cap = surrogate_sup_bound(s);
            let r_cap = remainder_sup_bound(n, t, s).map_err(|e| e.to_string())?;
            let mut rng = ChaCha8Rng::seed_from_u64(point_seed(seed, n, t, s));
            for i in 0..tests {
                let f = random_float_test(&mut rng, t + 1, i % 2 == 0);
                let sur = builder.build(&f).map_err(|e| e.to_string())?;
                if sur.h_sup() > h_cap || sur.remainder_sup > r_cap {
                    return Err(format!(
                        "n={n} t={t} s={s} test={i}: |h|={} (cap {h_cap}), |R|={} (cap {r_cap})",
                        sur.h_sup(),
                        sur.remainder_sup
                    ));
                }
            }
            Ok(tests as u64)
        })
        .collect();
    sum_outcomes(parts)
}

fn low_degree_exact(max_n: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = 0;
    for n in 2..=max_n {
        for t in 1..n {
            for s in 0..t {
                let builder = ExactSurrogateBuilder::new(n, t, s).map_err(|e| e.to_string())?;
                for i in 0..4 {
                    let f: Vec<Rational> = if i % 2 == 0 {
                        (0..=t).map(|_| if rng.gen::<bool>() { int(1) } else { int(-1) }).collect()
                    } else {
                        (0..=t).map(|_| rat(rng.gen_range(-64..=64), 64)).collect()
                    };
                    let sur = builder.build(&f).map_err(|e| e.to_string())?;
                    let h_ok = surrogate_bound_holds_exact(&sur.h_sup(), s);
                    let r_ok = remainder_bound_holds_exact(&sur.remainder_sup, n, t, s).map_err(|e| e.to_string())?;
                    if !h_ok || !r_ok {
                        return Err(format!("n={n} t={t} s={s} test={i}: exact bound violated"));
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(cases)
}

fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (SymmetricDistribution, SymmetricDistribution) {
    let mut one = || {
        let mut w: Vec<Rational> =
            (0..=n).map(|_| if rng.gen_bool(0.25) { int(0) } else { int(rng.gen_range(1..=40)) }).collect();
        if w.iter().all(Zero::is_zero) {
            w[0] = int(1);
        }
        let total: Rational = w.iter().sum();
        SymmetricDistribution::new(w.into_iter().map(|v| v / &total).collect()).expect("normalized")
    };
    (one(), one())
}

fn distance_equivalence(max_n: usize, pairs: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = 0;
    for n in 1..=max_n {
        for p in 0..pairs {
            let (mu, nu) = random_pair(&mut rng, n);
            for t in 0..=n {
                let fast = stat_distance_t(&mu, &nu, t).map_err(|e| e.to_string())?;
                let slow = brute_force_distance(&mu, &nu, t).map_err(|e| e.to_string())?;
                if fast != slow {
                    return Err(format!("n={n} t={t} pair={p}: kernel {fast} vs enumeration {slow}"));
                }
                cases += 1;
            }
        }
    }
    Ok(cases)
}

fn parity_fixture(max_n: usize) -> Outcome {
    for n in 1..=max_n {
        let (mu, nu) = make_parity_pair(n).map_err(|e| e.to_string())?;
        let k = n - 1;
        let fast = is_k_delta_indistinguishable(&mu, &nu, k, &int(0)).map_err(|e| e.to_string())?;
        let slow = is_k_delta_indistinguishable_brute_force(&mu, &nu, k, &int(0)).map_err(|e| e.to_string())?;
        let full_fast = stat_distance_t(&mu, &nu, n).map_err(|e| e.to_string())?;
        let full_slow = brute_force_distance(&mu, &nu, n).map_err(|e| e.to_string())?;
        if !fast.holds || !slow.holds || !full_fast.is_one() || !full_slow.is_one() {
            return Err(format!("n={n} k={k}: parity pair check failed"));
        }
    }
    Ok(max_n as u64)
}

/// Exact-oracle instances `k < t <= min(n - 1, 10)`, `n <= max_n`.
pub fn sandwich_grid(max_n: usize) -> Vec<(usize, usize, usize, Rational)> {
    let mut grid = Vec::new();
    for n in 2..=max_n {
        for t in 1..=(n - 1).min(10) {
            for k in 0..t {
                for delta in [int(0), rat(1, 100), rat(1, 10)] {
                    grid.push((n, k, t, delta));
                }
            }
        }
    }
    grid
}

fn sandwich(max_n: usize) -> Outcome {
    let parts: Vec<Outcome> = sandwich_grid(max_n)
        .par_iter()
        .map(|(n, k, t, delta)| {
            let tuple = format!("n={n} t={t} k={k} delta={delta}");
            let result = max_advantage_exact(*n, *k, *t, delta).map_err(|e| format!("{tuple}: {e}"))?;
            if !verify_witness(&result).map_err(|e| e.to_string())? {
                return Err(format!("{tuple}: witness does not reproduce the advantage"));
            }
            check_sandwich(&result).map_err(|e| format!("{tuple}: {e}"))?;
            Ok(1)
        })
        .collect();
    sum_outcomes(parts)
}

fn heuristic_overlap(max_n: usize, restarts: usize, seed: u64) -> Result<(u64, u64), String> {
    let mut grid = Vec::new();
    for n in 3..=max_n {
        for t in 1..=(n - 1).min(8) {
            for k in 0..t {
                grid.push((n, k, t));
            }
        }
    }
    let parts: Vec<Result<bool, String>> = grid
        .par_iter()
        .map(|&(n, k, t)| {
            let delta = rat(1, 100);
            let exact = max_advantage_exact(n, k, t, &delta).map_err(|e| e.to_string())?;
            let h = max_advantage_heuristic(n, k, t, &delta, restarts, point_seed(seed, n, t, k))
                .map_err(|e| e.to_string())?;
            if h.advantage > exact.advantage {
                return Err(format!(
                    "n={n} t={t} k={k}: heuristic {} above exact {}",
                    rational_to_f64(&h.advantage),
                    rational_to_f64(&exact.advantage)
                ));
            }
            Ok(h.advantage == exact.advantage)
        })
        .collect();
    let mut equal = 0;
    for p in &parts {
        if *p.as_ref().map_err(Clone::clone)? {
            equal += 1;
        }
    }
    Ok((parts.len() as u64, equal))
}

impl Summary {
    pub fn text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status} {:<26} {:>9} cases {:>8.2}s", c.name, c.cases, c.seconds));
            if let Some(f) = &c.failure {
                out.push_str(&format!("  failing tuple: {f}"));
            }
            out.push('\n');
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out.push_str(if self.passed { "selftest passed\n" } else { "selftest FAILED\n" });
        out
    }
}
