//! Theorem experiments: validation, `σ(B)`, centering, estimate rows and
//! the pass/fail verdict.

use serde::{Deserialize, Serialize};

use super::config::{CenteringMode, ConeConfig, ExperimentConfig, Method, RunOptions, SigmaB};
use super::diagnostics::{centering_diagnostic, single_big_jump_diag, sumconv_check, CenteringDiagnostic, SingleJumpRow, SumConvReport};
use super::embed::LabCone;
use super::estimate::{embedded_mean, estimate_event_prob, Centering};
use super::{LabError, MIN_SUCCESSES, PREFLIGHT_TRIALS};
use crate::cone::{axiom_suite, AxiomReport, ConeError, TOL};
use crate::cones::{ConvexBodiesCone, FunctionsCone, MaxCone, UnionCone};
use crate::regvar::{mu_polar, sigma_estimate, validate_regime, ElementLaw, Regime, RegimeReport};

/// One row of the estimate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub n: u64,
    pub lambda_n: f64,
    pub gamma_n: f64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub gamma_p: f64,
    #[serde(rename = "mu_U")]
    pub mu_u: f64,
    pub ratio: f64,
    /// `n σ(B) P(ζ > λ_n r)`, the one-big-jump prediction of `p_hat`.
    pub single_jump_ref: f64,
    /// Zero for closed-form rows.
    pub trials_used: u64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaReport {
    /// `value`, `estimate` or `analytic`.
    pub source: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteringReport {
    pub mode: String,
    /// Norm of the embedded mean `m`, so that `‖I(A_n)‖ = n ‖m‖`.
    pub mean_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// Norm of the pointwise standard errors of a Monte Carlo mean.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_se_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub band: [f64; 2],
    /// The n-values whose ratios must lie in the band.
    pub checked_n: Vec<u64>,
    pub ratio_pass: bool,
    /// Outcome of the centering-distance check, for Theorem 2 runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centering_pass: Option<bool>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub cone: String,
    pub regime: RegimeReport,
    pub sigma_b: SigmaReport,
    #[serde(rename = "mu_U")]
    pub mu_u: f64,
    pub rows: Vec<EstimateRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centering: Option<CenteringReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centering_diagnostic: Option<CenteringDiagnostic>,
    pub single_jump: Vec<SingleJumpRow>,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, LabError> {
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Builds the configured cone and hands it to `$body` as `$cone`.
macro_rules! with_cone {
    ($cfg:expr, $cone:ident => $body:expr) => {
        match $cfg {
            ConeConfig::Max { claims } => {
                let $cone = MaxCone::with_claims(claims);
                $body
            }
            ConeConfig::ConvexBodies { dim, metric, grid, claims } => {
                let $cone = ConvexBodiesCone::new(*dim, *metric, *grid)?.with_claims(claims);
                $body
            }
            ConeConfig::Functions { tabulation, claims } => {
                let $cone = FunctionsCone::new(tabulation)?.with_claims(claims);
                $body
            }
            ConeConfig::Union { dim, claims } => {
                let $cone = UnionCone::new(*dim).with_claims(claims);
                $body
            }
        }
    };
}

/// Runs the axiom suite on the configured cone.
pub fn run_axioms(cone: &ConeConfig, trials: u64, tol: f64, seed: u64) -> Result<AxiomReport, LabError> {
    if trials == 0 {
        return Err(LabError::Config("axiom suite needs at least one trial".into()));
    }
    with_cone!(cone, c => Ok(axiom_suite(&c, &c.sampler(), trials, tol, seed)))
}

/// Runs the configured theorem experiment.
pub fn run_theorem(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<TheoremReport, LabError> {
    cfg.validate()?;
    with_threads(opts.threads, || with_cone!(&cfg.cone, c => theorem_run_on(c, cfg, opts)))?
}

/// Runs the norm-quantile diagnostic of the configured experiment.
pub fn run_diagnostics(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SumConvReport, LabError> {
    cfg.validate()?;
    with_threads(opts.threads, || {
        with_cone!(&cfg.cone, c => {
            let law = ElementLaw::new(c, cfg.spec.clone())?;
            sumconv_check(&law, cfg)
        })
    })?
}

/// Parses, validates and runs a JSON experiment.
pub fn build_and_run(json: &str, opts: &RunOptions) -> Result<TheoremReport, LabError> {
    run_theorem(&ExperimentConfig::from_json(json)?, opts)
}

fn preflight<C: LabCone>(cone: &C, seed: u64) -> Result<(), LabError> {
    let report = axiom_suite(cone, &cone.sampler(), PREFLIGHT_TRIALS, TOL, seed);
    if let Some(e) = report.declared_failures().next() {
        let witness = e
            .counterexample
            .as_ref()
            .map(|c| c.detail.clone())
            .unwrap_or_else(|| format!("{} of {} checks failed", e.failures, e.checked));
        return Err(ConeError::AxiomViolation { axiom: e.axiom.clone(), witness }.into());
    }
    Ok(())
}

fn resolve_sigma<C: LabCone>(law: &ElementLaw<C>, cfg: &ExperimentConfig) -> Result<SigmaReport, LabError> {
    Ok(match cfg.sigma_b {
        SigmaB::Value(v) => SigmaReport { source: "value".into(), value: v, ci: None, draws: None },
        SigmaB::Estimate { estimate } => {
            let p = sigma_estimate(law, &cfg.event.direction, estimate, cfg.seed)?;
            SigmaReport {
                source: "estimate".into(),
                value: p.estimate,
                ci: Some([p.lo, p.hi]),
                draws: Some(estimate),
            }
        }
        SigmaB::Keyword(_) => {
            let v = law
                .cone()
                .analytic_sigma(&cfg.spec.spectral, &cfg.event.direction)
                .ok_or_else(|| {
                    LabError::Config(format!(
                        "no closed form for sigma(B) with preset `{}` and predicate `{}`; \
                         give a number or {{\"estimate\": N}}",
                        cfg.spec.spectral.name(),
                        cfg.event.direction.label()
                    ))
                })?;
            SigmaReport { source: "analytic".into(), value: v, ci: None, draws: None }
        }
    })
}

fn resolve_centering<C: LabCone>(
    law: &ElementLaw<C>,
    cfg: &ExperimentConfig,
) -> Result<(Centering<C::Vector>, Option<CenteringReport>), LabError> {
    let cone = law.cone();
    let needs_embedding = !matches!(cfg.centering, CenteringMode::Zero);
    if needs_embedding {
        if cfg.regime == Regime::Theorem1 {
            return Err(LabError::Config("theorem1 runs are uncentered; use centering mode `zero`".into()));
        }
        if !cone.flags().invariant {
            return Err(LabError::Config(format!(
                "embedded centering needs an invariant cone; `{}` does not claim invariance",
                cone.name()
            )));
        }
    }
    Ok(match &cfg.centering {
        CenteringMode::Zero => (Centering::Zero, None),
        CenteringMode::EmbeddedMeanAnalytic { mean } => {
            let m = cone.parse_vector(mean)?;
            let report = CenteringReport {
                mode: "embedded_mean_analytic".into(),
                mean_norm: cone.vector_norm(&m),
                samples: None,
                mean_se_norm: None,
            };
            (Centering::Embedded { mean: m }, Some(report))
        }
        CenteringMode::EmbeddedMeanMc { samples } => {
            let (m, se) = embedded_mean(law, *samples, cfg.seed)?;
            let report = CenteringReport {
                mode: "embedded_mean_mc".into(),
                mean_norm: cone.vector_norm(&m),
                samples: Some(*samples),
                mean_se_norm: Some(se),
            };
            (Centering::Embedded { mean: m }, Some(report))
        }
    })
}

/// The theorem experiment on an already built cone.
pub fn theorem_run_on<C: LabCone>(
    cone: C,
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<TheoremReport, LabError> {
    let regime = validate_regime(&cfg.spec, &cfg.schedule, cfg.regime, &cfg.n_grid)?;
    if cone.name() == "union" {
        return Err(LabError::Config(
            "the union cone fails neutral identity and sub-invariance; neither theorem applies".into(),
        ));
    }
    let flags = cone.flags();
    if cfg.regime == Regime::Theorem1 && !flags.sub_invariant {
        return Err(LabError::Config(format!(
            "theorem1 needs a sub-invariant cone; `{}` does not claim sub-invariance",
            cone.name()
        )));
    }
    cone.check_predicate(&cfg.event.direction)?;
    preflight(&cone, cfg.seed)?;

    let law = ElementLaw::new(cone, cfg.spec.clone())?;
    let cone = law.cone();
    let mut warnings = regime.warnings.clone();
    let sigma = resolve_sigma(&law, cfg)?;
    let (centering, centering_report) = resolve_centering(&law, cfg)?;
    let mu_u = mu_polar(&cfg.spec, &cfg.event, sigma.value);
    if !(mu_u > 0.0) {
        return Err(LabError::Config(format!("mu(U) = {mu_u}: the event has no limit mass")));
    }

    let centered = matches!(centering, Centering::Embedded { .. });
    let exact_available = !centered
        && cone
            .exact_prob(&cfg.spec, &cfg.event.direction, cfg.event.r, 1, 1.0)
            .is_some();
    let use_exact = match cfg.method {
        Method::Exact if !exact_available => {
            return Err(LabError::Config(format!(
                "no closed form for this event on cone `{}`; use method `monte_carlo`",
                cone.name()
            )))
        }
        Method::Exact => true,
        Method::Auto => exact_available,
        Method::MonteCarlo => false,
    };

    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let lambda = cfg.schedule.lambda(n);
        let gamma = cfg.spec.gamma_n(n, lambda)?;
        let single = n as f64 * law.single_term_prob(&cfg.event, lambda, sigma.value);
        let (p_hat, lo, hi, used) = if use_exact {
            let p = cone
                .exact_prob(&cfg.spec, &cfg.event.direction, cfg.event.r, n, lambda)
                .expect("checked above");
            (p, p, p, 0)
        } else {
            let p = estimate_event_prob(&law, &cfg.event, &centering, n, lambda, cfg.trials, cfg.seed)?;
            if p.successes < MIN_SUCCESSES {
                if opts.allow_thin {
                    warnings.push(format!(
                        "n = {n}: only {} successes in {} trials; the interval is unreliable",
                        p.successes, p.trials
                    ));
                } else {
                    return Err(LabError::BudgetTooSmall { n, successes: p.successes, trials: p.trials });
                }
            }
            (p.estimate, p.lo, p.hi, p.trials)
        };
        log::info!("n = {n}: lambda = {lambda:.4e}, p = {p_hat:.4e}, ratio = {:.4}", gamma * p_hat / mu_u);
        rows.push(EstimateRow {
            n,
            lambda_n: lambda,
            gamma_n: gamma,
            p_hat,
            ci_lo: lo,
            ci_hi: hi,
            gamma_p: gamma * p_hat,
            mu_u,
            ratio: gamma * p_hat / mu_u,
            single_jump_ref: single,
            trials_used: used,
            exact: use_exact,
        });
    }

    let centering_diag = if cfg.regime == Regime::Theorem2 {
        Some(centering_diagnostic(&law, cfg, &centering)?)
    } else {
        None
    };
    let single_jump = single_big_jump_diag(cone, &cfg.spec, &cfg.event, &rows, cfg.band);
    let verdict = verdict(&rows, cfg.band, centering_diag.as_ref());

    Ok(TheoremReport {
        cone: cone.name().to_string(),
        regime,
        sigma_b: sigma,
        mu_u,
        rows,
        centering: centering_report,
        centering_diagnostic: centering_diag,
        single_jump,
        verdict,
        warnings,
    })
}

/// PASS when the ratio lies in the band at the last two n-values. The
/// centering distance check is reported alongside but does not enter.
fn verdict(rows: &[EstimateRow], band: [f64; 2], centering: Option<&CenteringDiagnostic>) -> Verdict {
    let tail = &rows[rows.len().saturating_sub(2)..];
    let outside: Vec<String> = tail
        .iter()
        .filter(|r| !(band[0] <= r.ratio && r.ratio <= band[1]))
        .map(|r| format!("ratio {:.4} at n = {}", r.ratio, r.n))
        .collect();
    let ratio_pass = outside.is_empty();
    let centering_pass = centering.map(|c| c.pass);
    let mut detail = if ratio_pass {
        format!("ratio within [{}, {}] for the last {} n-values", band[0], band[1], tail.len())
    } else {
        format!("outside [{}, {}]: {}", band[0], band[1], outside.join(", "))
    };
    if let Some(c) = centering {
        detail.push_str(&format!("; centering distance: {}", c.detail));
    }
    Verdict {
        pass: ratio_pass,
        band,
        checked_n: tail.iter().map(|r| r.n).collect(),
        ratio_pass,
        centering_pass,
        detail,
    }
}
