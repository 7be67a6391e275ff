//! Parameter sweeps of the advantage bound over `(n, delta)` grids, with `t`,
//! `k` and `s` derived from `n` by rules.

use std::fmt;
use std::str::FromStr;

use hahnbound_core::arith::Mode;
use hahnbound_core::bound::{best_s, theorem_bound_in, BoundParams, BoundValue};
use rayon::prelude::*;
use serde::Deserialize;

use crate::format::{clip_log, fmt_log, fmt_sig};

pub const CSV_HEADER: &str = "n,t,k,s,delta,term1,term2,bound,clipped";

/// Slack for floor/ceil of products like `0.29 * 100` that land a rounding
/// error below an integer.
const ROUND_EPS: f64 = 1e-9;

fn floor_eps(x: f64) -> usize {
    (x + ROUND_EPS).floor().max(0.0) as usize
}

fn ceil_eps(x: f64) -> usize {
    (x - ROUND_EPS).ceil().max(0.0) as usize
}

fn split_rule(s: &str) -> (&str, Option<&str>) {
    match s.split_once(':') {
        Some((name, arg)) => (name.trim(), Some(arg.trim())),
        None => (s.trim(), None),
    }
}

fn parse_arg<T: FromStr>(rule: &str, arg: Option<&str>) -> Result<T, String> {
    let arg = arg.ok_or_else(|| format!("rule `{rule}` needs an argument, as in `{rule}:VALUE`"))?;
    arg.parse().map_err(|_| format!("bad argument `{arg}` for rule `{rule}`"))
}

fn positive_fraction(rule: &str, v: f64) -> Result<f64, String> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("rule `{rule}` needs a value in (0, 1), got {v}"))
    }
}

/// How `t` follows from `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TRule {
    /// `t = floor(c n)`.
    Frac(f64),
    /// `t = n - q` with `q = ceil(n^p)`.
    MinusPow(f64),
    Fixed(usize),
}

impl TRule {
    pub fn apply(self, n: usize) -> usize {
        match self {
            TRule::Frac(c) => floor_eps(c * n as f64),
            TRule::MinusPow(p) => n.saturating_sub(ceil_eps((n as f64).powf(p))),
            TRule::Fixed(t) => t,
        }
    }
}

impl FromStr for TRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match split_rule(s) {
            ("frac", a) => Ok(TRule::Frac(positive_fraction("frac", parse_arg("frac", a)?)?)),
            ("minus-pow", a) => Ok(TRule::MinusPow(positive_fraction("minus-pow", parse_arg("minus-pow", a)?)?)),
            ("fixed", a) => Ok(TRule::Fixed(parse_arg("fixed", a)?)),
            (other, _) => Err(format!("unknown t rule `{other}` (expected frac:C, minus-pow:P or fixed:T)")),
        }
    }
}

impl fmt::Display for TRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TRule::Frac(c) => write!(f, "frac:{c}"),
            TRule::MinusPow(p) => write!(f, "minus-pow:{p}"),
            TRule::Fixed(t) => write!(f, "fixed:{t}"),
        }
    }
}

/// How `k` follows from `n` (or from `s`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KRule {
    Frac(f64),
    Fixed(usize),
    /// `k = s`, for `s` rules that do not depend on `k`.
    EqS,
}

impl FromStr for KRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match split_rule(s) {
            ("frac", a) => Ok(KRule::Frac(positive_fraction("frac", parse_arg("frac", a)?)?)),
            ("fixed", a) => Ok(KRule::Fixed(parse_arg("fixed", a)?)),
            ("eq-s", None) => Ok(KRule::EqS),
            (other, _) => Err(format!("unknown k rule `{other}` (expected frac:C, fixed:K or eq-s)")),
        }
    }
}

impl fmt::Display for KRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KRule::Frac(c) => write!(f, "frac:{c}"),
            KRule::Fixed(k) => write!(f, "fixed:{k}"),
            KRule::EqS => write!(f, "eq-s"),
        }
    }
}

/// How `s` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SRule {
    /// The minimizing `s` in `0..=k`.
    Scan,
    /// One row for every `s` in `0..=k`.
    All,
    Fixed(usize),
    EqK,
    /// `s = ceil(d sqrt(t ln n))`.
    SqrtTLogN(f64),
    /// `s = ceil(d n sqrt(ln n / q))` with `q = n - t`.
    NSqrtLogOverQ(f64),
}

impl SRule {
    fn depends_on_k(self) -> bool {
        matches!(self, SRule::Scan | SRule::All | SRule::EqK)
    }

    fn formula(self, n: usize, t: usize) -> Option<usize> {
        let ln_n = (n as f64).ln();
        match self {
            SRule::Fixed(s) => Some(s),
            SRule::SqrtTLogN(d) => Some(ceil_eps(d * (t as f64 * ln_n).sqrt())),
            SRule::NSqrtLogOverQ(d) => {
                let q = n.checked_sub(t).filter(|&q| q > 0)?;
                Some(ceil_eps(d * n as f64 * (ln_n / q as f64).sqrt()))
            }
            SRule::Scan | SRule::All | SRule::EqK => None,
        }
    }
}

impl FromStr for SRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let positive = |rule: &str, a: Option<&str>| -> Result<f64, String> {
            let d: f64 = parse_arg(rule, a)?;
            if d.is_finite() && d > 0.0 {
                Ok(d)
            } else {
                Err(format!("rule `{rule}` needs a positive constant"))
            }
        };
        match split_rule(s) {
            ("scan", None) => Ok(SRule::Scan),
            ("all", None) => Ok(SRule::All),
            ("eq-k", None) => Ok(SRule::EqK),
            ("fixed", a) => Ok(SRule::Fixed(parse_arg("fixed", a)?)),
            ("sqrt-t-log-n", a) => Ok(SRule::SqrtTLogN(positive("sqrt-t-log-n", a)?)),
            ("n-sqrt-log-over-q", a) => Ok(SRule::NSqrtLogOverQ(positive("n-sqrt-log-over-q", a)?)),
            (other, _) => Err(format!(
                "unknown s rule `{other}` (expected scan, all, eq-k, fixed:S, sqrt-t-log-n:D or n-sqrt-log-over-q:D)"
            )),
        }
    }
}

impl fmt::Display for SRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SRule::Scan => write!(f, "scan"),
            SRule::All => write!(f, "all"),
            SRule::EqK => write!(f, "eq-k"),
            SRule::Fixed(s) => write!(f, "fixed:{s}"),
            SRule::SqrtTLogN(d) => write!(f, "sqrt-t-log-n:{d}"),
            SRule::NSqrtLogOverQ(d) => write!(f, "n-sqrt-log-over-q:{d}"),
        }
    }
}

/// `start:end:step` (inclusive) or a comma-separated list.
pub fn parse_n_values(spec: &str) -> Result<Vec<usize>, String> {
    let bad = |what: &str| format!("bad n specification `{spec}`: {what}");
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let nums: Result<Vec<usize>, _> = parts.iter().map(|p| p.trim().parse::<usize>()).collect();
        let nums = nums.map_err(|_| bad("expected START:END[:STEP] with integers"))?;
        let (start, end, step) = match nums.as_slice() {
            [a, b] => (*a, *b, 1),
            [a, b, c] => (*a, *b, *c),
            _ => return Err(bad("expected START:END[:STEP]")),
        };
        if step == 0 {
            return Err(bad("step must be positive"));
        }
        Ok((start..=end).step_by(step).collect())
    } else if spec.trim().is_empty() {
        Ok(Vec::new())
    } else {
        spec.split(',').map(|p| p.trim().parse::<usize>().map_err(|_| bad("expected integers"))).collect()
    }
}

pub fn parse_deltas(spec: &str) -> Result<Vec<f64>, String> {
    spec.split(',')
        .map(|p| {
            let v: f64 = p.trim().parse().map_err(|_| format!("bad delta `{p}`"))?;
            Ok(v)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub t_rule: TRule,
    pub k_rule: KRule,
    pub s_rule: SRule,
    pub deltas: Vec<f64>,
    pub arith: Mode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_values: Vec::new(),
            t_rule: TRule::Frac(0.5),
            k_rule: KRule::Frac(0.2),
            s_rule: SRule::EqK,
            deltas: vec![0.0],
            arith: Mode::Float,
        }
    }
}

/// TOML form of [`SweepConfig`]. Every key is optional; command-line flags
/// override file values.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub n: Option<NSpec>,
    pub t: Option<String>,
    pub k: Option<String>,
    pub s: Option<String>,
    pub delta: Option<Vec<f64>>,
    pub arith: Option<String>,
    /// `csv` or `json`; read by the caller, not part of [`SweepConfig`].
    pub format: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NSpec {
    List(Vec<usize>),
    Range { start: usize, end: usize, step: Option<usize> },
    Text(String),
}

impl NSpec {
    pub fn values(&self) -> Result<Vec<usize>, String> {
        match self {
            NSpec::List(v) => Ok(v.clone()),
            NSpec::Range { start, end, step } => {
                let step = step.unwrap_or(1);
                if step == 0 {
                    return Err("n.step must be positive".to_string());
                }
                Ok((*start..=*end).step_by(step).collect())
            }
            NSpec::Text(s) => parse_n_values(s),
        }
    }
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("malformed sweep config: {e}"))
    }

    /// Applies the file's settings on top of `base`.
    pub fn apply(&self, base: &mut SweepConfig) -> Result<(), String> {
        if let Some(n) = &self.n {
            base.n_values = n.values()?;
        }
        if let Some(t) = &self.t {
            base.t_rule = t.parse()?;
        }
        if let Some(k) = &self.k {
            base.k_rule = k.parse()?;
        }
        if let Some(s) = &self.s {
            base.s_rule = s.parse()?;
        }
        if let Some(d) = &self.delta {
            base.deltas = d.clone();
        }
        if let Some(a) = &self.arith {
            base.arith = a.parse().map_err(|e: hahnbound_core::Error| e.to_string())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub t: usize,
    pub k: usize,
    pub s: usize,
    pub delta: f64,
    pub value: BoundValue,
}

impl SweepRow {
    fn cells(&self) -> [String; 4] {
        [
            fmt_log(self.value.term1),
            fmt_log(self.value.term2),
            fmt_log(self.value.total),
            fmt_log(clip_log(self.value.total)),
        ]
    }

    pub fn to_csv(&self) -> String {
        let [term1, term2, bound, clipped] = self.cells();
        format!("{},{},{},{},{},{term1},{term2},{bound},{clipped}", self.n, self.t, self.k, self.s, fmt_sig(self.delta))
    }

    /// Same fields as the CSV row. Bound values stay strings so magnitudes
    /// below the f64 range survive.
    pub fn to_json(&self) -> serde_json::Value {
        let [term1, term2, bound, clipped] = self.cells();
        serde_json::json!({
            "n": self.n,
            "t": self.t,
            "k": self.k,
            "s": self.s,
            "delta": self.delta,
            "term1": term1,
            "term2": term2,
            "bound": bound,
            "clipped": clipped,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// One message per grid point that violates `s <= k < t < n`.
    pub skipped: Vec<String>,
}

impl SweepOutput {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv());
            out.push('\n');
        }
        out
    }

    /// JSON array of row objects, one line.
    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self.rows.iter().map(SweepRow::to_json).collect();
        let mut out = serde_json::Value::Array(rows).to_string();
        out.push('\n');
        out
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.k_rule == KRule::EqS && self.s_rule.depends_on_k() {
            return Err(format!("k rule eq-s needs an s rule that does not depend on k, got `{}`", self.s_rule));
        }
        if let Some(d) = self.deltas.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return Err(format!("0 <= delta <= 1 violated (delta = {d})"));
        }
        Ok(())
    }

    /// Evaluates every grid point; rows come out sorted by
    /// `(n, t, k, s, delta)` whatever the thread count.
    pub fn run(&self) -> Result<SweepOutput, String> {
        self.validate()?;
        let mut points: Vec<(usize, f64)> =
            self.n_values.iter().flat_map(|&n| self.deltas.iter().map(move |&d| (n, d))).collect();
        points.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        points.dedup();
        let results: Vec<Result<Vec<SweepRow>, String>> =
            points.par_iter().map(|&(n, delta)| self.evaluate(n, delta)).collect();
        let mut rows = Vec::new();
        let mut skipped = Vec::new();
        for r in results {
            match r {
                Ok(mut v) => rows.append(&mut v),
                Err(msg) => skipped.push(msg),
            }
        }
        rows.sort_by(|a, b| {
            (a.n, a.t, a.k, a.s).cmp(&(b.n, b.t, b.k, b.s)).then(a.delta.total_cmp(&b.delta))
        });
        Ok(SweepOutput { rows, skipped })
    }

    fn evaluate(&self, n: usize, delta: f64) -> Result<Vec<SweepRow>, String> {
        let t = self.t_rule.apply(n);
        let skip = |k: Option<usize>, s: Option<usize>, why: String| {
            let show = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
            format!("skip n={n} t={t} k={} s={} delta={}: {why}", show(k), show(s), fmt_sig(delta))
        };
        let (k, fixed_s) = match self.k_rule {
            KRule::EqS => {
                let s = self.s_rule.formula(n, t).ok_or_else(|| skip(None, None, "t < n violated".into()))?;
                (s, Some(s))
            }
            KRule::Frac(c) => (floor_eps(c * n as f64), None),
            KRule::Fixed(k) => (k, None),
        };
        let s_values: Vec<usize> = match (fixed_s, self.s_rule) {
            (Some(s), _) => vec![s],
            (None, SRule::All) => (0..=k).collect(),
            (None, SRule::EqK) => vec![k],
            (None, SRule::Scan) => {
                let (s, _) = best_s(n, t, k, delta).map_err(|e| skip(Some(k), None, e.to_string()))?;
                vec![s]
            }
            (None, rule) => vec![rule.formula(n, t).ok_or_else(|| skip(Some(k), None, "t < n violated".into()))?],
        };
        s_values
            .into_iter()
            .map(|s| {
                let params = BoundParams::new(n, t, k, s, delta).map_err(|e| skip(Some(k), Some(s), e.to_string()))?;
                let value = theorem_bound_in(&params, self.arith).map_err(|e| skip(Some(k), Some(s), e.to_string()))?;
                Ok(SweepRow { n, t, k, s, delta, value })
            })
            .collect()
    }
}
