//! Argument parsing and subcommand dispatch.
//!
//! Exit codes: 0 success, 1 invariant or self-test failure, 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hahnbound_core::arith::{format_rational, parse_rational, rational_to_f64, Mode};
use hahnbound_core::bound::{best_s, theorem_bound_in, BoundParams};
use hahnbound_core::distributions::{is_k_delta_indistinguishable, stat_distance_t};
use hahnbound_core::hahn::{FloatHahnTable, HahnTable};
use hahnbound_core::oracle::{
    max_advantage_heuristic, sandwich_from, AdvantageProblem, OracleMode, OracleResult, DEFAULT_T_MAX,
};
use hahnbound_core::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::fixture::parse_distribution;
use crate::format::{fmt_log, fmt_sig};
use crate::report::{sandwich_line, BoundReport, OracleJson};
use crate::selftest;
use crate::sweep::{parse_deltas, parse_n_values, SweepConfig, SweepFile};

/// Largest `n` for exact Hahn table dumps.
pub const EXACT_TABLE_MAX_N: usize = 64;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameters; exit code 2.
    Usage(String),
    /// A check or invariant failed; exit code 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Soundness(_) | Error::Infeasible | Error::Unbounded | Error::MalformedLp(_) => {
                CliError::Failure(e.to_string())
            }
            Error::ExactLimit { t, t_max } => CliError::Usage(format!(
                "exact mode enumerates 2^t tests and is limited to t <= {t_max} (got t = {t}); \
                 use --mode heuristic or raise --t-max"
            )),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn io_failure(e: std::io::Error) -> CliError {
    CliError::Failure(format!("i/o error: {e}"))
}

#[derive(Debug, Parser)]
#[command(name = "hahnbound", version, about = "Advantage bounds for symmetric bounded-indistinguishable distributions")]
pub struct Cli {
    /// Worker threads; 0 uses every available core. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the advantage bound at one parameter point.
    Bound(BoundArgs),
    /// Evaluate the bound over a parameter grid and write CSV.
    Sweep(SweepArgs),
    /// Compute the maximal advantage by linear programming and compare with the bound.
    Oracle(OracleArgs),
    /// Run the invariant suite.
    Selftest(SelftestArgs),
    /// Dump the Hahn polynomial table for one n.
    Hahn(HahnArgs),
    /// Distance between the t-wise marginals of two distribution fixtures.
    Distance(DistanceArgs),
}

#[derive(Debug, Args)]
pub struct ArithArg {
    /// Arithmetic mode: exact or float.
    #[arg(long, env = "HAHNBOUND_ARITH")]
    pub arith: Option<String>,
}

impl ArithArg {
    fn mode(&self) -> Result<Option<Mode>, CliError> {
        self.arith.as_deref().map(|a| a.parse::<Mode>().map_err(CliError::from)).transpose()
    }
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub k: usize,
    /// Degree of the low-degree surrogate; scanned over 0..=k when omitted.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[command(flatten)]
    pub arith: ArithArg,
    /// Print JSON instead of a key=value line.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML file with any of the keys n, t, k, s, delta, arith. Flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Values of n: START:END[:STEP] (inclusive) or a comma-separated list.
    #[arg(long)]
    pub n: Option<String>,
    /// t rule: frac:C (t = floor(C n)), minus-pow:P (t = n - ceil(n^P)) or fixed:T.
    #[arg(long = "t-rule")]
    pub t_rule: Option<String>,
    /// k rule: frac:C, fixed:K or eq-s.
    #[arg(long = "k-rule")]
    pub k_rule: Option<String>,
    /// s rule: scan, all, eq-k, fixed:S, sqrt-t-log-n:D or n-sqrt-log-over-q:D.
    #[arg(long = "s-rule")]
    pub s_rule: Option<String>,
    /// Comma-separated delta values.
    #[arg(long)]
    pub delta: Option<String>,
    #[command(flatten)]
    pub arith: ArithArg,
    /// csv (default) or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Do not report skipped grid points on standard error.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub t: usize,
    /// Rational or decimal; decimals are read exactly.
    #[arg(long, default_value = "0")]
    pub delta: String,
    /// exact or heuristic.
    #[arg(long, default_value = "exact")]
    pub mode: String,
    /// Heuristic restarts.
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Heuristic seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest t accepted in exact mode.
    #[arg(long = "t-max", default_value_t = DEFAULT_T_MAX)]
    pub t_max: usize,
    /// Indented JSON.
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// quick or full.
    #[arg(long, default_value = "quick")]
    pub level: String,
    /// Print a JSON summary instead of text.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    /// Corrupt one table entry to confirm the suite notices.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct HahnArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub arith: ArithArg,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    /// Fixture for the first distribution.
    #[arg(long)]
    pub mu: PathBuf,
    /// Fixture for the second distribution.
    #[arg(long)]
    pub nu: PathBuf,
    #[arg(long)]
    pub t: usize,
    /// Also check (k, delta)-wise indistinguishability.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value = "0")]
    pub delta: String,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return 2;
        }
    };
    // Commands write into buffers so the pool never holds the caller's handles.
    let mut out_buf = Vec::new();
    let mut err_buf = Vec::new();
    let result = pool.install(|| dispatch(&cli.command, &mut out_buf, &mut err_buf));
    let _ = out.write_all(&out_buf);
    let _ = err.write_all(&err_buf);
    match result {
        Ok(code) => code,
        Err(e) => {
            let msg = match &e {
                CliError::Usage(m) | CliError::Failure(m) => m,
            };
            let _ = writeln!(err, "error: {msg}");
            e.exit_code()
        }
    }
}

fn dispatch(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Bound(a) => cmd_bound(a, out),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Oracle(a) => cmd_oracle(a, out, err),
        Command::Selftest(a) => cmd_selftest(a, out),
        Command::Hahn(a) => cmd_hahn(a, out),
        Command::Distance(a) => cmd_distance(a, out),
    }
}

fn cmd_bound(a: &BoundArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let mode = a.arith.mode()?.unwrap_or(Mode::Float);
    let (s, scanned) = match a.s {
        Some(s) => (s, false),
        None => (best_s(a.n, a.t, a.k, a.delta)?.0, true),
    };
    let value = theorem_bound_in(&BoundParams::new(a.n, a.t, a.k, s, a.delta)?, mode)?;
    let report = BoundReport::new(a.n, a.t, a.k, s, a.delta, scanned, &value);
    let text = if a.json { serde_json::to_string(&report).expect("serializable") } else { report.text() };
    writeln!(out, "{text}").map_err(io_failure)?;
    Ok(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TableFormat {
    Csv,
    Json,
}

fn table_format(s: &str) -> Result<TableFormat, CliError> {
    match s {
        "csv" => Ok(TableFormat::Csv),
        "json" => Ok(TableFormat::Json),
        other => Err(CliError::Usage(format!("unknown format `{other}` (expected csv or json)"))),
    }
}

fn sweep_config(a: &SweepArgs) -> Result<(SweepConfig, TableFormat), CliError> {
    let mut cfg = SweepConfig::default();
    let mut format = TableFormat::Csv;
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let file = SweepFile::parse(&text).map_err(CliError::Usage)?;
        file.apply(&mut cfg).map_err(CliError::Usage)?;
        if let Some(f) = &file.format {
            format = table_format(f)?;
        }
    }
    if let Some(f) = &a.format {
        format = table_format(f)?;
    }
    if let Some(n) = &a.n {
        cfg.n_values = parse_n_values(n).map_err(CliError::Usage)?;
    }
    if let Some(t) = &a.t_rule {
        cfg.t_rule = t.parse().map_err(CliError::Usage)?;
    }
    if let Some(k) = &a.k_rule {
        cfg.k_rule = k.parse().map_err(CliError::Usage)?;
    }
    if let Some(s) = &a.s_rule {
        cfg.s_rule = s.parse().map_err(CliError::Usage)?;
    }
    if let Some(d) = &a.delta {
        cfg.deltas = parse_deltas(d).map_err(CliError::Usage)?;
    }
    if let Some(mode) = a.arith.mode()? {
        cfg.arith = mode;
    }
    cfg.validate().map_err(CliError::Usage)?;
    Ok((cfg, format))
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let (cfg, format) = sweep_config(a)?;
    let result = cfg.run().map_err(CliError::Usage)?;
    if !a.quiet {
        for msg in &result.skipped {
            writeln!(err, "{msg}").map_err(io_failure)?;
        }
    }
    let text = match format {
        TableFormat::Csv => result.to_csv(),
        TableFormat::Json => result.to_json(),
    };
    match &a.output {
        Some(path) => std::fs::write(path, text).map_err(io_failure)?,
        None => out.write_all(text.as_bytes()).map_err(io_failure)?,
    }
    Ok(0)
}

fn exact_oracle(n: usize, k: usize, t: usize, delta: &hahnbound_core::Rational, t_max: usize) -> Result<OracleResult, CliError> {
    if t > t_max {
        return Err(Error::ExactLimit { t, t_max }.into());
    }
    let problem = AdvantageProblem::new(n, k, t, delta)?;
    let chunks: Vec<_> = (0..problem.num_chunks())
        .into_par_iter()
        .map(|c| problem.solve_chunk(c))
        .collect::<Result<_, _>>()?;
    Ok(problem.finish(chunks)?)
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let delta = parse_rational(&a.delta)?;
    let mode: OracleMode = a.mode.parse()?;
    let result = match mode {
        OracleMode::Exact => exact_oracle(a.n, a.k, a.t, &delta, a.t_max)?,
        OracleMode::Heuristic => max_advantage_heuristic(a.n, a.k, a.t, &delta, a.restarts, a.seed)?,
    };
    // The bound needs k < t < n; outside that range the oracle value is still reported.
    let ordering = best_s(a.n, a.t, a.k, rational_to_f64(&delta));
    let report = match ordering {
        Ok(_) => Some(sandwich_from(result.clone())?),
        Err(_) => None,
    };
    let json = OracleJson::new(&result, report.as_ref());
    let text = if a.pretty { serde_json::to_string_pretty(&json) } else { serde_json::to_string(&json) };
    writeln!(out, "{}", text.expect("serializable")).map_err(io_failure)?;
    match (&report, ordering) {
        (Some(rep), _) => writeln!(err, "{}", sandwich_line(rep)),
        (None, Err(e)) => writeln!(err, "sandwich: no bound applies ({e})"),
        (None, Ok(_)) => Ok(()),
    }
    .map_err(io_failure)?;
    Ok(0)
}

fn cmd_selftest(a: &SelftestArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let level = a.level.parse().map_err(CliError::Usage)?;
    let summary = selftest::run(&selftest::Options { level, seed: a.seed, inject_fault: a.inject_fault });
    let text = if a.json {
        format!("{}\n", serde_json::to_string_pretty(&summary).expect("serializable"))
    } else {
        summary.text()
    };
    out.write_all(text.as_bytes()).map_err(io_failure)?;
    Ok(if summary.passed { 0 } else { 1 })
}

#[derive(Serialize)]
struct HahnRow {
    r: usize,
    x: usize,
    q: String,
    phi: String,
    h: String,
}

fn cmd_hahn(a: &HahnArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let mode = a.arith.mode()?.unwrap_or(Mode::Float);
    let format = table_format(&a.format)?;
    let n = a.n;
    let mut rows = Vec::with_capacity((n + 1) * (n + 1));
    match mode {
        Mode::Exact => {
            if n > EXACT_TABLE_MAX_N {
                return Err(CliError::Usage(format!(
                    "exact tables are limited to n <= {EXACT_TABLE_MAX_N} (got n = {n}); use --arith float"
                )));
            }
            let table = HahnTable::new(n);
            for r in 0..=n {
                let h = format_rational(table.norm(r));
                for x in 0..=n {
                    rows.push(HahnRow {
                        r,
                        x,
                        q: format_rational(table.q(r, x)),
                        phi: fmt_sig(table.phi_f64(r, x)),
                        h: h.clone(),
                    });
                }
            }
        }
        Mode::Float => {
            let table = FloatHahnTable::new(n);
            for r in 0..=n {
                let h = fmt_log(hahnbound_core::arith::SignedLog::from_ln(1, table.ln_norm(r)));
                for x in 0..=n {
                    rows.push(HahnRow { r, x, q: fmt_log(table.q(r, x)), phi: fmt_sig(table.phi(r, x)), h: h.clone() });
                }
            }
        }
    }
    if format == TableFormat::Json {
        writeln!(out, "{}", serde_json::to_string(&rows).expect("serializable")).map_err(io_failure)?;
    } else {
        let mut text = String::from("r,x,q,phi,h\n");
        for row in &rows {
            text.push_str(&format!("{},{},{},{},{}\n", row.r, row.x, row.q, row.phi, row.h));
        }
        out.write_all(text.as_bytes()).map_err(io_failure)?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct DistanceReport {
    n: usize,
    t: usize,
    distance: String,
    distance_f64: f64,
    k: Option<usize>,
    delta: Option<String>,
    k_distance: Option<String>,
    indistinguishable: Option<bool>,
}

fn cmd_distance(a: &DistanceArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let load = |path: &PathBuf| -> Result<_, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read fixture {}: {e}", path.display())))?;
        parse_distribution(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    };
    let mu = load(&a.mu)?;
    let nu = load(&a.nu)?;
    let d = stat_distance_t(&mu, &nu, a.t)?;
    let mut report = DistanceReport {
        n: mu.n(),
        t: a.t,
        distance: format_rational(&d),
        distance_f64: rational_to_f64(&d),
        k: None,
        delta: None,
        k_distance: None,
        indistinguishable: None,
    };
    if let Some(k) = a.k {
        let delta = parse_rational(&a.delta)?;
        let ind = is_k_delta_indistinguishable(&mu, &nu, k, &delta)?;
        report.k = Some(k);
        report.delta = Some(format_rational(&delta));
        report.k_distance = Some(format_rational(&ind.distance));
        report.indistinguishable = Some(ind.holds);
    }
    writeln!(out, "{}", serde_json::to_string(&report).expect("serializable")).map_err(io_failure)?;
    Ok(0)
}
