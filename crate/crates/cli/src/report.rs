//! JSON and text renderings of oracle and bound results.

use hahnbound_core::arith::{format_rational, rational_to_f64};
use hahnbound_core::bound::BoundValue;
use hahnbound_core::oracle::{OracleResult, SandwichReport};
use serde::Serialize;

use crate::fixture::Fixture;
use crate::format::{clip_log, fmt_log, fmt_sig};

#[derive(Debug, Clone, Serialize)]
pub struct OracleParams {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub delta: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witnesses {
    pub mu: Fixture,
    pub nu: Fixture,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundJson {
    pub s: usize,
    pub term1: f64,
    pub term2: f64,
    /// Raw bound; `null` when it overflows f64.
    pub raw: Option<f64>,
    pub clipped: f64,
    pub ln_raw: f64,
}

impl BoundJson {
    pub fn new(s: usize, v: &BoundValue) -> Self {
        let raw = v.raw();
        BoundJson {
            s,
            term1: v.term1.to_f64(),
            term2: v.term2.to_f64(),
            raw: raw.is_finite().then_some(raw),
            clipped: v.clipped(),
            ln_raw: v.ln_total(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub lps_solved: u64,
    pub pivots: u64,
    pub chunks: usize,
    pub alternations: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleJson {
    pub params: OracleParams,
    pub mode: &'static str,
    /// Exact rational `"p/q"`.
    pub advantage: String,
    pub advantage_f64: f64,
    pub witnesses: Witnesses,
    pub test: Vec<i8>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    /// `null` when `(n, t, k)` is outside the bound's range `k < t < n`.
    pub theorem_bound: Option<BoundJson>,
    /// Bound over advantage; `null` when the advantage is zero or no bound applies.
    pub gap_ratio: Option<f64>,
    pub metadata: Metadata,
}

impl OracleJson {
    pub fn new(r: &OracleResult, report: Option<&SandwichReport>) -> Self {
        OracleJson {
            params: OracleParams { n: r.n, k: r.k, t: r.t, delta: format_rational(&r.delta) },
            mode: r.mode.as_str(),
            advantage: format_rational(&r.advantage),
            advantage_f64: rational_to_f64(&r.advantage),
            witnesses: Witnesses {
                mu: Fixture::from_distribution(&r.witness_mu),
                nu: Fixture::from_distribution(&r.witness_nu),
            },
            test: r.witness_test.clone(),
            seed: r.stats.seed,
            restarts: r.stats.restarts,
            theorem_bound: report.map(|rep| BoundJson::new(rep.s_star, &rep.bound)),
            gap_ratio: report.and_then(|rep| rep.gap_ratio).filter(|g| g.is_finite()),
            metadata: Metadata {
                lps_solved: r.stats.lps_solved,
                pivots: r.stats.pivots,
                chunks: r.stats.chunks,
                alternations: r.stats.alternations,
            },
        }
    }
}

/// One-line summary comparing the oracle value with the bound.
pub fn sandwich_line(report: &SandwichReport) -> String {
    let gap = report.gap_ratio.map_or("undefined".to_string(), fmt_sig);
    format!(
        "sandwich: advantage={} bound={} s*={} gap_ratio={}",
        fmt_sig(rational_to_f64(&report.oracle.advantage)),
        fmt_log(report.bound.total),
        report.s_star,
        gap
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub t: usize,
    pub k: usize,
    pub s: usize,
    pub delta: f64,
    pub s_scanned: bool,
    pub term1: String,
    pub term2: String,
    pub bound: String,
    pub clipped: String,
}

impl BoundReport {
    pub fn new(n: usize, t: usize, k: usize, s: usize, delta: f64, s_scanned: bool, v: &BoundValue) -> Self {
        BoundReport {
            n,
            t,
            k,
            s,
            delta,
            s_scanned,
            term1: fmt_log(v.term1),
            term2: fmt_log(v.term2),
            bound: fmt_log(v.total),
            clipped: fmt_log(clip_log(v.total)),
        }
    }

    pub fn text(&self) -> String {
        format!(
            "n={} t={} k={} s={}{} delta={} term1={} term2={} bound={} clipped={}",
            self.n,
            self.t,
            self.k,
            self.s,
            if self.s_scanned { " (best)" } else { "" },
            fmt_sig(self.delta),
            self.term1,
            self.term2,
            self.bound,
            self.clipped
        )
    }
}
