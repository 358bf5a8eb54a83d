//! The subcommands: each reads a JSON config, runs, and writes its outputs,
//! a summary and a manifest into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use conelab::lab::{
    run_axioms, run_diagnostics, run_theorem, with_threads, write_estimates_csv, write_norm_quantiles_csv,
    write_ratio_dat, ConeConfig, ExperimentConfig, LabError, RunOptions,
};
use conelab::regvar::{truncated_moment_ratio, validate_regime, KaramataQuery, RegVarSpec, Regime};
use serde::{Deserialize, Serialize};

use crate::manifest::{config_hash, sha256_hex, RunManifest, MANIFEST_FILE};

pub const SUMMARY_FILE: &str = "summary.json";

/// Why a command stopped before producing a verdict.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Regime(String),
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Regime(_) => 3,
            CliError::Budget(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Regime(m) | CliError::Budget(m) => m,
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Regime(_) => CliError::Regime(e.to_string()),
            LabError::BudgetTooSmall { .. } => CliError::Budget(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o error: {e}"))
    }
}

/// A finished command: its verdict and a one-line account of it.
#[derive(Debug)]
pub struct Outcome {
    pub pass: bool,
    pub message: String,
}

/// Flags shared by the commands that draw random numbers.
#[derive(Debug, Clone)]
pub struct RunFlags {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub allow_thin: bool,
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    command: &'a str,
    pass: bool,
    manifest: &'a str,
    manifest_sha256: String,
    report: T,
}

fn read_config(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

/// Writes `files`, then the manifest, then a summary that carries the
/// manifest's hash.
fn emit<T: Serialize>(
    out: &Path,
    mut manifest: RunManifest,
    files: Vec<(&str, Vec<u8>)>,
    pass: bool,
    report: T,
) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    let mut paths = Vec::with_capacity(files.len() + 2);
    for (name, bytes) in &files {
        let path = out.join(name);
        fs::write(&path, bytes)?;
        paths.push(path);
    }
    paths.push(out.join(SUMMARY_FILE));
    paths.push(out.join(MANIFEST_FILE));
    manifest.finish(&paths);
    let manifest_json = manifest.to_json();
    fs::write(out.join(MANIFEST_FILE), &manifest_json)?;
    let summary = Summary {
        command: &manifest.command,
        pass,
        manifest: MANIFEST_FILE,
        manifest_sha256: sha256_hex(manifest_json.as_bytes()),
        report,
    };
    let mut text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    fs::write(out.join(SUMMARY_FILE), text)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomsConfig {
    pub cone: ConeConfig,
    #[serde(default = "thousand")]
    pub trials: u64,
    #[serde(default = "axiom_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
}

fn thousand() -> u64 {
    1000
}

fn axiom_tol() -> f64 {
    1e-9
}

/// Runs the axiom suite; passes when no declared axiom fails.
pub fn axioms(flags: &RunFlags) -> Result<Outcome, CliError> {
    let mut cfg: AxiomsConfig = parse(&read_config(&flags.config)?)?;
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if !(cfg.tol >= 0.0 && cfg.tol.is_finite()) {
        return Err(CliError::Config(format!("tol must be a finite non-negative number, got {}", cfg.tol)));
    }
    let manifest = RunManifest::new("axioms", &flags.config, config_hash(&cfg), Some(cfg.seed), flags.threads);
    let report = with_threads(flags.threads, || run_axioms(&cfg.cone, cfg.trials, cfg.tol, cfg.seed))??;
    let declared: Vec<&str> = report.declared_failures().map(|e| e.axiom.as_str()).collect();
    let pass = declared.is_empty();
    let message = if pass {
        format!("{}: all declared axioms hold over {} trials", report.cone, report.trials)
    } else {
        format!("{}: declared axioms fail: {}", report.cone, declared.join(", "))
    };
    let mut json = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?;
    json.push(b'\n');
    emit(&flags.out, manifest, vec![("axioms.json", json)], pass, &report)?;
    Ok(Outcome { pass, message })
}

fn experiment(flags: &RunFlags) -> Result<(ExperimentConfig, RunOptions), CliError> {
    let mut cfg = ExperimentConfig::from_json(&read_config(&flags.config)?)?;
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    Ok((cfg, RunOptions { threads: flags.threads, allow_thin: flags.allow_thin }))
}

/// Runs a Theorem 1 or Theorem 2 experiment; passes on a PASS verdict.
pub fn theorem(flags: &RunFlags, regime: Regime) -> Result<Outcome, CliError> {
    let (cfg, opts) = experiment(flags)?;
    let command = match regime {
        Regime::Theorem1 => "theorem1",
        Regime::Theorem2 => "theorem2",
    };
    if cfg.regime != regime {
        return Err(CliError::Config(format!(
            "the config declares regime {:?}; run it with the matching subcommand",
            cfg.regime
        )));
    }
    let manifest = RunManifest::new(command, &flags.config, config_hash(&cfg), Some(cfg.seed), flags.threads);
    let report = run_theorem(&cfg, &opts)?;
    let mut csv = Vec::new();
    write_estimates_csv(&report.rows, &mut csv)?;
    let mut dat = Vec::new();
    write_ratio_dat(&report.rows, &mut dat)?;
    let pass = report.verdict.pass;
    let message = format!("{}: {}", if pass { "PASS" } else { "FAIL" }, report.verdict.detail);
    emit(&flags.out, manifest, vec![("estimates.csv", csv), ("ratio.dat", dat)], pass, &report)?;
    Ok(Outcome { pass, message })
}

/// Runs the norm-quantile diagnostic after the regime check.
pub fn diagnostics(flags: &RunFlags) -> Result<Outcome, CliError> {
    let (cfg, opts) = experiment(flags)?;
    validate_regime(&cfg.spec, &cfg.schedule, cfg.regime, &cfg.n_grid).map_err(LabError::from)?;
    let manifest = RunManifest::new("diagnostics", &flags.config, config_hash(&cfg), Some(cfg.seed), flags.threads);
    let report = run_diagnostics(&cfg, &opts)?;
    let mut csv = Vec::new();
    write_norm_quantiles_csv(&report.rows, &mut csv)?;
    let pass = report.pass;
    let message = format!("{}: {}", if pass { "PASS" } else { "FAIL" }, report.detail);
    emit(&flags.out, manifest, vec![("norm_quantiles.csv", csv)], pass, &report)?;
    Ok(Outcome { pass, message })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KaramataCheck {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub query: KaramataQuery,
    /// Evaluation points; the verdict uses the last.
    pub x: Vec<f64>,
    #[serde(default = "half_percent")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentCheck {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub spec: RegVarSpec,
    pub gamma: f64,
    /// Truncation points; the verdict uses the last.
    pub t: Vec<f64>,
    #[serde(default = "one_percent")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KaramataConfig {
    #[serde(default)]
    pub checks: Vec<KaramataCheck>,
    #[serde(default)]
    pub truncated_moments: Vec<MomentCheck>,
}

fn half_percent() -> f64 {
    0.005
}

fn one_percent() -> f64 {
    0.01
}

#[derive(Debug, Clone, Serialize)]
pub struct KaramataRow {
    pub check: String,
    pub x: f64,
    pub ratio: f64,
    pub limit: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub check: String,
    pub limit: f64,
    pub final_ratio: f64,
    pub final_relative_error: f64,
    pub tolerance: f64,
    /// Whether the relative error never grows along the points.
    pub monotone: bool,
    pub pass: bool,
}

fn evaluate(
    label: String,
    points: &[f64],
    limit: f64,
    tolerance: f64,
    ratio: impl Fn(f64) -> Result<f64, conelab::regvar::RegVarError>,
    rows: &mut Vec<KaramataRow>,
) -> Result<CheckSummary, CliError> {
    if points.is_empty() {
        return Err(CliError::Config(format!("{label}: no evaluation points")));
    }
    if !(tolerance > 0.0) {
        return Err(CliError::Config(format!("{label}: tolerance must be positive")));
    }
    let mut errors = Vec::with_capacity(points.len());
    for &x in points {
        let r = ratio(x).map_err(|e| CliError::Config(format!("{label}: {e}")))?;
        let err = (r / limit - 1.0).abs();
        errors.push(err);
        rows.push(KaramataRow { check: label.clone(), x, ratio: r, limit, relative_error: err });
    }
    let last = rows.last().expect("a row was pushed");
    let final_err = *errors.last().expect("nonempty");
    Ok(CheckSummary {
        check: label,
        limit,
        final_ratio: last.ratio,
        final_relative_error: final_err,
        tolerance,
        monotone: errors.windows(2).all(|w| w[1] <= w[0]),
        pass: final_err <= tolerance,
    })
}

/// Evaluates Karamata ratios and truncated-moment ratios against their
/// limits; passes when every check ends within its tolerance.
pub fn karamata(config: &Path, out: &Path) -> Result<Outcome, CliError> {
    let cfg: KaramataConfig = parse(&read_config(config)?)?;
    if cfg.checks.is_empty() && cfg.truncated_moments.is_empty() {
        return Err(CliError::Config("no checks configured".into()));
    }
    let manifest = RunManifest::new("karamata", config, config_hash(&cfg), None, None);
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (i, c) in cfg.checks.iter().enumerate() {
        c.query.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let label = c.label.clone().unwrap_or_else(|| format!("karamata_{i}"));
        summaries.push(evaluate(label, &c.x, c.query.limit(), c.tolerance, |x| c.query.ratio(x), &mut rows)?);
    }
    for (i, m) in cfg.truncated_moments.iter().enumerate() {
        let label = m.label.clone().unwrap_or_else(|| format!("truncated_moment_{i}"));
        let limit = m.gamma / (m.gamma - m.spec.alpha);
        summaries.push(evaluate(
            label,
            &m.t,
            limit,
            m.tolerance,
            |t| truncated_moment_ratio(&m.spec, m.gamma, t),
            &mut rows,
        )?);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Config(e.to_string()))?;
    }
    let csv = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    let failed: Vec<&str> = summaries.iter().filter(|s| !s.pass).map(|s| s.check.as_str()).collect();
    let pass = failed.is_empty();
    let message = if pass {
        format!("PASS: {} checks within tolerance", summaries.len())
    } else {
        format!("FAIL: {}", failed.join(", "))
    };
    emit(out, manifest, vec![("karamata.csv", csv)], pass, &summaries)?;
    Ok(Outcome { pass, message })
}
