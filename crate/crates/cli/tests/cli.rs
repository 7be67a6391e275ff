use std::process::{Command, Output};

use serde_json::Value;

fn hahnbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hahnbound")).args(args).output().expect("binary runs")
}

fn in_process(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hahnbound").chain(args.iter().copied());
    let code = hahnbound::app::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn field(line: &str, key: &str) -> f64 {
    let prefix = format!("{key}=");
    line.split_whitespace()
        .find_map(|w| w.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no {key} in {line}"))
        .parse()
        .unwrap()
}

#[test]
fn bound_reports_best_s_and_clipped_value() {
    let (code, out, _) = in_process(&["bound", "--n", "100", "--t", "50", "--k", "20", "--delta", "0"]);
    assert_eq!(code, 0);
    assert!(out.contains("s=20 (best)"), "{out}");
    let best = field(&out, "bound");
    let direct = 101f64.sqrt() * (-50.0 * 21.0 * 22.0 / (2.0 * 100.0 * 72.0f64)).exp();
    assert!((best - direct).abs() < 1e-9 * direct);
    assert!((best - 2.0205).abs() < 1e-3);
    assert_eq!(field(&out, "clipped"), 1.0);

    let (_, low, _) = in_process(&["bound", "--n", "100", "--t", "50", "--k", "20", "--s", "5"]);
    assert!(field(&low, "bound") > best);
}

#[test]
fn bound_json_has_every_field() {
    let (code, out, _) = in_process(&["bound", "--n", "60", "--t", "30", "--k", "10", "--delta", "0.001", "--json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    for key in ["n", "t", "k", "s", "delta", "term1", "term2", "bound", "clipped"] {
        assert!(v.get(key).is_some(), "missing {key}: {out}");
    }
}

#[test]
fn ordering_violations_are_usage_errors() {
    let out = hahnbound(&["bound", "--n", "100", "--t", "100", "--k", "20"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t < n"));

    let (code, _, err) = in_process(&["bound", "--n", "100", "--t", "50", "--k", "50"]);
    assert_eq!(code, 2);
    assert!(err.contains("k < t"), "{err}");

    let (code, _, _) = in_process(&["bound", "--n", "100"]);
    assert_eq!(code, 2);
    let (code, out, _) = in_process(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("sweep"));
}

#[test]
fn arith_env_and_flag() {
    let out = Command::new(env!("CARGO_BIN_EXE_hahnbound"))
        .args(["bound", "--n", "40", "--t", "20", "--k", "8"])
        .env("HAHNBOUND_ARITH", "exact")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let exact = String::from_utf8(out.stdout).unwrap();
    let (_, float, _) = in_process(&["bound", "--n", "40", "--t", "20", "--k", "8", "--arith", "float"]);
    assert!((field(&exact, "bound") - field(&float, "bound")).abs() < 1e-9);
    let (code, _, _) = in_process(&["bound", "--n", "40", "--t", "20", "--k", "8", "--arith", "decimal"]);
    assert_eq!(code, 2);
}

#[test]
fn sweep_is_byte_identical_across_runs_and_thread_counts() {
    let args = ["sweep", "--n", "100:2000:100", "--delta", "0,0.001", "--s-rule", "scan"];
    let a = hahnbound(&args);
    let b = hahnbound(&args);
    let mut threaded = vec!["--jobs", "4"];
    threaded.extend_from_slice(&args);
    let c = hahnbound(&threaded);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 20 * 2);
}

#[test]
fn empty_grid_prints_header_only() {
    let (code, out, err) = in_process(&["sweep", "--n", "5,6", "--t-rule", "fixed:10"]);
    assert_eq!(code, 0);
    assert_eq!(out, "n,t,k,s,delta,term1,term2,bound,clipped\n");
    assert_eq!(err.lines().count(), 2);
    assert!(err.starts_with("skip n=5"));
}

#[test]
fn sweep_config_file_and_overrides() {
    let dir = std::env::temp_dir().join(format!("hahnbound-sweep-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("grid.toml");
    std::fs::write(&cfg, "n = { start = 200, end = 400, step = 100 }\nt = \"frac:0.5\"\nk = \"frac:0.2\"\ns = \"eq-k\"\ndelta = [0.0]\n")
        .unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let (code, out, _) = in_process(&["sweep", "--config", cfg_s]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 4);
    let (_, out, _) = in_process(&["sweep", "--config", cfg_s, "--n", "500"]);
    assert!(out.lines().nth(1).unwrap().starts_with("500,250,100,100,"));

    let csv = dir.join("out.csv");
    let (code, out, _) = in_process(&["sweep", "--config", cfg_s, "--output", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);

    std::fs::write(&cfg, "n = [100]\nbogus = 1\n").unwrap();
    let (code, _, err) = in_process(&["sweep", "--config", cfg_s]);
    assert_eq!(code, 2);
    assert!(err.contains("bogus"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn oracle_json_is_sound_and_self_consistent() {
    let out = hahnbound(&["oracle", "--n", "8", "--k", "4", "--t", "6", "--delta", "0", "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let adv = v["advantage_f64"].as_f64().unwrap();
    let bound = v["theorem_bound"]["raw"].as_f64().unwrap();
    assert!(adv > 0.0 && adv <= bound);
    assert_eq!(v["witnesses"]["mu"]["weights"].as_array().unwrap().len(), 9);
    assert_eq!(v["test"].as_array().unwrap().len(), 7);
    assert!(v["metadata"]["lps_solved"].as_u64().unwrap() > 0);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("sandwich:"), "{stderr}");
}

#[test]
fn oracle_with_k_zero_separates_completely() {
    let (code, out, _) = in_process(&["oracle", "--n", "6", "--k", "0", "--t", "4"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["advantage"], "1");
}

#[test]
fn oracle_exact_limit_and_bad_delta() {
    let (code, _, err) = in_process(&["oracle", "--n", "30", "--k", "5", "--t", "20"]);
    assert_eq!(code, 2);
    assert!(err.contains("--mode heuristic"), "{err}");
    let (code, _, _) = in_process(&["oracle", "--n", "8", "--k", "2", "--t", "4", "--delta", "abc"]);
    assert_eq!(code, 2);
    let (code, _, _) = in_process(&["oracle", "--n", "8", "--k", "2", "--t", "4", "--mode", "guess"]);
    assert_eq!(code, 2);
}

#[test]
fn oracle_outside_bound_range_reports_null_bound() {
    let (code, out, err) = in_process(&["oracle", "--n", "6", "--k", "4", "--t", "3"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["theorem_bound"].is_null());
    assert_eq!(v["advantage"], "0");
    assert!(err.contains("no bound applies"));
}

#[test]
fn heuristic_oracle_is_seed_deterministic() {
    let args = ["oracle", "--n", "14", "--k", "5", "--t", "9", "--mode", "heuristic", "--restarts", "6", "--seed", "7"];
    let a = hahnbound(&args);
    let b = hahnbound(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["restarts"], 6);
    let exact: Value =
        serde_json::from_str(&in_process(&["oracle", "--n", "14", "--k", "5", "--t", "9"]).1).unwrap();
    assert!(v["advantage_f64"].as_f64().unwrap() <= exact["advantage_f64"].as_f64().unwrap() + 1e-15);
}

#[test]
fn hahn_table_dump() {
    let (code, out, _) = in_process(&["hahn", "--n", "3", "--arith", "exact"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "r,x,q,phi,h");
    assert_eq!(lines.len(), 1 + 16);
    assert_eq!(lines[6], "1,1,1/3,0.4472135955,5/9");
    let (code, out, _) = in_process(&["hahn", "--n", "20", "--format", "json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 21 * 21);
    let (code, _, err) = in_process(&["hahn", "--n", "100", "--arith", "exact"]);
    assert_eq!(code, 2);
    assert!(err.contains("n <= 64"));
}

#[test]
fn distance_between_parity_fixtures() {
    let dir = std::env::temp_dir().join(format!("hahnbound-dist-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mu = dir.join("mu.json");
    let nu = dir.join("nu.json");
    std::fs::write(&mu, r#"{"n": 3, "weights": ["1/4", "0", "3/4", "0"]}"#).unwrap();
    std::fs::write(&nu, r#"{"n": 3, "weights": [0, 0.75, 0, 0.25]}"#).unwrap();
    let args = ["distance", "--mu", mu.to_str().unwrap(), "--nu", nu.to_str().unwrap()];
    let run = |extra: &[&str]| {
        let mut a = args.to_vec();
        a.extend_from_slice(extra);
        let (code, out, _) = in_process(&a);
        assert_eq!(code, 0);
        serde_json::from_str::<Value>(&out).unwrap()
    };
    assert_eq!(run(&["--t", "3"])["distance"], "1");
    let v = run(&["--t", "2", "--k", "2"]);
    assert_eq!(v["distance"], "0");
    assert_eq!(v["indistinguishable"], true);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn selftest_quick_passes_and_detects_fault() {
    let (code, out, _) = in_process(&["selftest", "--level", "quick"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("selftest passed"));
    let (code, out, _) = in_process(&["selftest", "--level", "quick", "--inject-fault"]);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL orthogonality-exact"));
    assert!(out.contains("failing tuple"));
    let (code, out, _) = in_process(&["selftest", "--level", "quick", "--json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn sweep_json_matches_csv_rows() {
    let (code, csv, _) = in_process(&["sweep", "--n", "100,200", "--delta", "0,0.01"]);
    assert_eq!(code, 0);
    let (code, json, _) = in_process(&["sweep", "--n", "100,200", "--delta", "0,0.01", "--format", "json"]);
    assert_eq!(code, 0);
    let rows: Vec<Value> = serde_json::from_str(&json).unwrap();
    let lines: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), lines.len());
    for (row, line) in rows.iter().zip(lines) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(row["n"].to_string(), cells[0]);
        assert_eq!(row["bound"], cells[7]);
        assert_eq!(row["clipped"], cells[8]);
    }
    let (code, _, _) = in_process(&["sweep", "--n", "100", "--format", "xml"]);
    assert_eq!(code, 2);
}
