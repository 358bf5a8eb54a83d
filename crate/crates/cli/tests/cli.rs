use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

const MAX_EXACT: &str = r#"{
    "cone": {"kind": "max"},
    "spec": {"alpha": 1.5, "t_min": 1.0},
    "event": {"r": 1.0},
    "sigma_b": 1.0,
    "schedule": {"kind": "power", "exponent": 1.4},
    "n_grid": [100, 10000],
    "trials": 1,
    "regime": "theorem1",
    "method": "exact"
}"#;

const MAX_MC: &str = r#"{
    "cone": {"kind": "max"},
    "spec": {"alpha": 1.5, "t_min": 1.0},
    "event": {"r": 1.0},
    "sigma_b": 1.0,
    "schedule": {"kind": "power", "exponent": 1.1},
    "n_grid": [10, 20],
    "trials": 20000,
    "seed": 5,
    "regime": "theorem1",
    "method": "monte_carlo"
}"#;

struct Run {
    dir: TempDir,
    out: PathBuf,
    output: Output,
}

impl Run {
    fn code(&self) -> i32 {
        self.output.status.code().expect("exited normally")
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.output.stderr).into_owned()
    }
}

fn conelab(subcommand: &str, config: &str, extra: &[&str]) -> Run {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("config.json");
    fs::write(&path, config).unwrap();
    let out = dir.path().join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_conelab"))
        .arg(subcommand)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    Run { dir, out, output }
}

fn sha256(path: &Path) -> String {
    hex::encode(Sha256::digest(fs::read(path).unwrap()))
}

#[test]
fn max_theorem1_passes_with_all_outputs() {
    let r = conelab("theorem1", MAX_EXACT, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let csv = r.read("estimates.csv");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,lambda_n,gamma_n,p_hat,ci_lo,ci_hi,gamma_p,mu_U,ratio,single_jump_ref,trials_used,exact"
    );
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    let ratio: f64 = last[8].parse().unwrap();
    // (1 − (1 − q)^n)/(nq) with q = λ^{-1.5}, λ = 10^{5.6}.
    let q = 1e4f64.powf(1.4).powf(-1.5);
    let exact = -(1e4 * (-q).ln_1p()).exp_m1() / (1e4 * q);
    assert!((ratio - exact).abs() < 1e-12 && (ratio - 1.0).abs() < 1e-3);

    let dat = r.read("ratio.dat");
    assert_eq!(dat.lines().count(), 3);
    assert!(dat.lines().nth(2).unwrap().starts_with("10000 "));

    let summary = r.json("summary.json");
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["report"]["verdict"]["pass"], true);
    assert_eq!(summary["manifest_sha256"], sha256(&r.out.join("manifest.json")).as_str());

    let manifest = r.json("manifest.json");
    assert_eq!(manifest["command"], "theorem1");
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    let outputs: Vec<&str> = manifest["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for name in ["estimates.csv", "ratio.dat", "summary.json", "manifest.json"] {
        assert!(outputs.iter().any(|o| o.ends_with(name)), "{name} missing from {outputs:?}");
    }
    assert!(manifest["started_at"].as_str().unwrap() <= manifest["finished_at"].as_str().unwrap());
}

#[test]
fn slow_schedule_is_a_regime_violation() {
    let r = conelab("theorem1", &MAX_EXACT.replace("1.4", "0.9"), &[]);
    assert_eq!(r.code(), 3, "{}", r.stderr());
    assert!(r.stderr().contains("regime"));
    assert!(!r.out.join("estimates.csv").exists());
}

#[test]
fn seeded_runs_are_byte_identical_across_runs_and_workers() {
    let a = conelab("theorem1", MAX_MC, &["--seed", "42"]);
    let b = conelab("theorem1", MAX_MC, &["--seed", "42", "--threads", "4"]);
    let c = conelab("theorem1", MAX_MC, &["--seed", "43", "--threads", "1"]);
    for r in [&a, &b, &c] {
        assert!(matches!(r.code(), 0 | 1), "{}", r.stderr());
    }
    assert_eq!(a.read("estimates.csv"), b.read("estimates.csv"));
    assert_eq!(a.read("ratio.dat"), b.read("ratio.dat"));
    assert_ne!(a.read("estimates.csv"), c.read("estimates.csv"));
    assert_eq!(a.json("manifest.json")["seed"], 42);
    assert_eq!(a.json("manifest.json")["config_sha256"], b.json("manifest.json")["config_sha256"]);
    assert_ne!(a.json("manifest.json")["config_sha256"], c.json("manifest.json")["config_sha256"]);
}

#[test]
fn config_hash_ignores_formatting() {
    let a = conelab("theorem1", MAX_EXACT, &[]);
    let compact: Value = serde_json::from_str(MAX_EXACT).unwrap();
    let b = conelab("theorem1", &serde_json::to_string(&compact).unwrap(), &[]);
    assert_eq!(a.json("manifest.json")["config_sha256"], b.json("manifest.json")["config_sha256"]);
}

#[test]
fn thin_budget_exits_4_unless_allowed() {
    let thin = MAX_MC.replace("20000", "50");
    let r = conelab("theorem1", &thin, &[]);
    assert_eq!(r.code(), 4, "{}", r.stderr());
    assert!(r.stderr().contains("--allow-thin"));
    let r = conelab("theorem1", &thin, &["--allow-thin"]);
    assert!(matches!(r.code(), 0 | 1), "{}", r.stderr());
    let warnings = &r.json("summary.json")["report"]["warnings"];
    assert!(!warnings.as_array().unwrap().is_empty());
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(conelab("theorem1", "{not json", &[]).code(), 2);
    assert_eq!(conelab("theorem1", &MAX_EXACT.replace("\"trials\": 1", "\"trials\": 0"), &[]).code(), 2);
    assert_eq!(conelab("theorem1", &MAX_EXACT.replace("\"regime\"", "\"regim\""), &[]).code(), 2);
    // The subcommand must match the declared regime.
    assert_eq!(conelab("theorem2", MAX_EXACT, &[]).code(), 2);
    // The union cone is not sub-invariant, so it has no theorem runs.
    assert_eq!(conelab("theorem1", &MAX_EXACT.replace(r#""kind": "max""#, r#""kind": "union""#), &[]).code(), 2);

    let dir = TempDir::new().unwrap();
    let missing = Command::new(env!("CARGO_BIN_EXE_conelab"))
        .args(["karamata", "--config"])
        .arg(dir.path().join("absent.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn axioms_max_reports_undeclared_counterexample() {
    let r = conelab("axioms", r#"{"cone": {"kind": "max"}, "trials": 2000, "seed": 1}"#, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let report = r.json("axioms.json");
    let entry = report["entries"].as_array().unwrap().iter().find(|e| e["axiom"] == "second_distributivity").unwrap();
    assert_eq!(entry["status"], "fail");
    assert_eq!(entry["declared"], false);
    let cx = &entry["counterexample"];
    assert_eq!((cx["lhs"].as_f64(), cx["rhs"].as_f64()), (Some(2.0), Some(1.0)));
    assert_eq!(r.json("summary.json")["report"], report);
}

#[test]
fn axioms_union_records_sub_invariance_counterexample() {
    let r = conelab("axioms", r#"{"cone": {"kind": "union"}, "trials": 500}"#, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let report = r.json("axioms.json");
    let entry = report["entries"].as_array().unwrap().iter().find(|e| e["axiom"] == "sub_invariance").unwrap();
    assert_eq!(entry["status"], "fail");
    // d({10} ∪ {1}, {10}) = 9 against d({1}, ∅) = 1.
    assert_eq!(entry["counterexample"]["lhs"].as_f64(), Some(9.0));
    assert_eq!(entry["counterexample"]["rhs"].as_f64(), Some(1.0));
}

#[test]
fn false_invariance_claim_exits_1() {
    let r = conelab("axioms", r#"{"cone": {"kind": "max", "claims": {"invariant": true}}, "trials": 1000}"#, &[]);
    assert_eq!(r.code(), 1, "{}", r.stderr());
    assert_eq!(r.json("summary.json")["pass"], false);
    assert!(String::from_utf8_lossy(&r.output.stdout).contains("invariance"));
}

#[test]
fn karamata_checks_pass_and_fail_on_tolerance() {
    let cfg = r#"{
        "checks": [
            {"label": "lower", "query": {"f": {"kind": "power", "exponent": -1.5}, "beta": 2.0, "a": 1.0},
             "x": [100.0, 1000000.0]}
        ],
        "truncated_moments": [
            {"spec": {"alpha": 1.0, "t_min": 1.0}, "gamma": 2.0, "t": [10000.0]}
        ]
    }"#;
    let r = conelab("karamata", cfg, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let csv = r.read("karamata.csv");
    assert_eq!(csv.lines().next().unwrap(), "check,x,ratio,limit,relative_error");
    assert_eq!(csv.lines().count(), 4);
    let checks = r.json("summary.json")["report"].clone();
    assert_eq!(checks[0]["limit"].as_f64(), Some(1.5));
    assert_eq!(checks[0]["monotone"], true);
    // (2T − 1)/T at T = 10^4.
    assert!((checks[1]["final_ratio"].as_f64().unwrap() - 1.9999).abs() < 1e-9);

    let strict = cfg.replace("[10000.0]", "[10.0]");
    assert_eq!(conelab("karamata", &strict, &[]).code(), 1);
    assert_eq!(conelab("karamata", "{}", &[]).code(), 2);
}

#[test]
fn diagnostics_writes_quantile_table() {
    let cfg = MAX_EXACT
        .replace("[100, 10000]", "[100, 1000]")
        .replace(r#""method": "exact""#, r#""diagnostics": {"quantile_replicates": 2000, "quantile_limit": 0.1}"#);
    let r = conelab("diagnostics", &cfg, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let csv = r.read("norm_quantiles.csv");
    assert!(csv.starts_with("n,lambda_n,quantile_mc,quantile_exact,"));
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(conelab("diagnostics", &cfg.replace("1.4", "0.9"), &[]).code(), 3);
    drop(r.dir);
}
