//! Side checks of an experiment: the growth of `‖S_n‖/λ_n`, the distance of
//! `S_n` from its centering, and the gap to the one-big-jump prediction.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::embed::LabCone;
use super::estimate::{centering_distance, replicate_map, Centering};
use super::run::EstimateRow;
use super::LabError;
use crate::cone::PolarEvent;
use crate::regvar::{ElementLaw, RegVarSpec};
use crate::rng::Purpose;
use crate::stats::quantile;

/// Mean of `d(S_n, A_n)/λ_n` at one n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteringDistanceRow {
    pub n: u64,
    pub lambda_n: f64,
    pub mean_distance_ratio: f64,
    pub replicates: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteringDiagnostic {
    pub rows: Vec<CenteringDistanceRow>,
    pub decreasing: bool,
    pub limit: f64,
    pub pass: bool,
    pub detail: String,
}

/// The `level` quantile of `‖S_n‖/λ_n` at one n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormQuantileRow {
    pub n: u64,
    pub lambda_n: f64,
    pub quantile_mc: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantile_exact: Option<f64>,
    /// Replicates with `‖S_n‖ > Σ ‖ξ_i‖`.
    pub bound_violations: u64,
    pub replicates: u64,
    /// `(n/λ_n) E(ζ 1{ζ ≤ λ_n})`, reported when `α = 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated_mean_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumConvReport {
    pub cone: String,
    pub level: f64,
    pub limit: f64,
    pub rows: Vec<NormQuantileRow>,
    /// Whether the quantile column falls over its last step.
    pub decreasing: bool,
    pub pass: bool,
    pub detail: String,
}

/// Comparison of an estimate with `n σ(B) P(ζ > λ_n r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleJumpRow {
    pub n: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub single_jump_ref: f64,
    /// `|p_hat − ref| / p_hat`.
    pub relative_gap: f64,
    /// Known bound on the relative gap of the exact probability, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_bound: Option<f64>,
    /// Whether the interval meets the accepted range around `ref`: the gap
    /// bound when known, the ratio band otherwise.
    pub consistent: bool,
}

/// Compares estimate rows with the one-big-jump prediction.
pub fn single_big_jump_diag<C: LabCone>(
    cone: &C,
    spec: &RegVarSpec,
    event: &PolarEvent,
    rows: &[EstimateRow],
    band: [f64; 2],
) -> Vec<SingleJumpRow> {
    rows.iter()
        .map(|r| {
            let q = spec.tail_prob(r.lambda_n * event.r);
            let reference = r.single_jump_ref;
            let gap_bound = cone.single_jump_gap_bound(r.n, q);
            // With gap bound b, the exact probability lies in [ref/(1+b), ref].
            let (lo, hi) = match gap_bound {
                Some(b) => (reference / (1.0 + b), reference),
                None => (reference * band[0], reference * band[1]),
            };
            let tol = 1e-12 * reference;
            SingleJumpRow {
                n: r.n,
                p_hat: r.p_hat,
                ci_lo: r.ci_lo,
                ci_hi: r.ci_hi,
                single_jump_ref: reference,
                relative_gap: (r.p_hat - reference).abs() / r.p_hat,
                gap_bound,
                consistent: r.ci_lo <= hi + tol && r.ci_hi >= lo - tol,
            }
        })
        .collect()
}

/// Mean of `d(S_n, A_n)/λ_n` along the n-grid; passes when it decreases
/// strictly and ends below the configured limit.
pub(crate) fn centering_diagnostic<C: LabCone>(
    law: &ElementLaw<C>,
    cfg: &ExperimentConfig,
    centering: &Centering<C::Vector>,
) -> Result<CenteringDiagnostic, LabError> {
    let cone = law.cone();
    let count = cfg.diagnostics.centering_replicates;
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let lambda = cfg.schedule.lambda(n);
        let a_n = match centering {
            Centering::Zero => None,
            Centering::Embedded { mean } => Some(cone.vector_scale(n as f64, mean)),
        };
        let d = replicate_map(law, n, count, cfg.seed, Purpose::CenteringDistance, |rep| {
            centering_distance(cone, &rep.sum, a_n.as_ref())
        })?;
        let mean = d.iter().sum::<f64>() / count as f64;
        rows.push(CenteringDistanceRow { n, lambda_n: lambda, mean_distance_ratio: mean / lambda, replicates: count });
    }
    let values: Vec<f64> = rows.iter().map(|r| r.mean_distance_ratio).collect();
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let last = *values.last().expect("nonempty grid");
    let limit = cfg.diagnostics.centering_limit;
    let pass = decreasing && last < limit;
    let detail = format!(
        "{} along the grid, final value {last:.4} {} {limit}",
        if decreasing { "decreasing" } else { "not decreasing" },
        if last < limit { "<" } else { ">=" }
    );
    Ok(CenteringDiagnostic { rows, decreasing, limit, pass, detail })
}

/// The `level` quantile of `‖S_n‖/λ_n` along the n-grid, with the bound
/// `‖S_n‖ ≤ Σ ‖ξ_i‖` checked in every replicate. Passes when the quantile
/// falls over the last step of the grid, ends below the configured limit,
/// and (for sub-invariant cones) the bound never fails.
pub fn sumconv_check<C: LabCone>(law: &ElementLaw<C>, cfg: &ExperimentConfig) -> Result<SumConvReport, LabError> {
    let cone = law.cone();
    let d = cfg.diagnostics;
    let alpha_one = cfg.spec.alpha == 1.0;
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let lambda = cfg.schedule.lambda(n);
        let pairs = replicate_map(law, n, d.quantile_replicates, cfg.seed, Purpose::NormQuantile, |rep| {
            let norm = cone.norm(&rep.sum);
            Ok((norm / lambda, norm > rep.radius_total * (1.0 + 1e-9) + 1e-12))
        })?;
        let violations = pairs.iter().filter(|p| p.1).count() as u64;
        let mut ratios: Vec<f64> = pairs.into_iter().map(|p| p.0).collect();
        rows.push(NormQuantileRow {
            n,
            lambda_n: lambda,
            quantile_mc: quantile(&mut ratios, d.quantile_level),
            quantile_exact: cone.exact_norm_quantile(&cfg.spec, n, d.quantile_level).map(|q| q / lambda),
            bound_violations: violations,
            replicates: d.quantile_replicates,
            truncated_mean_ratio: alpha_one.then(|| n as f64 / lambda * cfg.spec.truncated_mean(lambda)),
        });
    }
    let column: Vec<f64> = rows.iter().map(|r| r.quantile_exact.unwrap_or(r.quantile_mc)).collect();
    let decreasing = column.windows(2).last().map_or(true, |w| w[1] < w[0]);
    let last = *column.last().expect("nonempty grid");
    let violations: u64 = rows.iter().map(|r| r.bound_violations).sum();
    let bound_ok = !cone.flags().sub_invariant || violations == 0;
    let trunc_ok = rows
        .iter()
        .filter_map(|r| r.truncated_mean_ratio)
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1] < w[0]);
    let pass = decreasing && last < d.quantile_limit && bound_ok && trunc_ok;
    let mut detail = format!(
        "quantile {} over the last step, final value {last:.4} {} {}",
        if decreasing { "falls" } else { "does not fall" },
        if last < d.quantile_limit { "<" } else { ">=" },
        d.quantile_limit
    );
    if violations > 0 {
        detail.push_str(&format!("; {violations} replicates break the norm bound"));
    }
    if !trunc_ok {
        detail.push_str("; truncated-mean column does not decrease");
    }
    Ok(SumConvReport {
        cone: cone.name().to_string(),
        level: d.quantile_level,
        limit: d.quantile_limit,
        rows,
        decreasing,
        pass,
        detail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::DirectionPredicate;
    use crate::cones::{convex_bodies_cone, max_cone, PolytopeMetric};
    use crate::lab::ExperimentConfig;
    use crate::regvar::SpectralPreset;

    fn config(cone: &str, preset: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{
                "cone": {cone},
                "spec": {{"alpha": 1.5, "t_min": 1.0, "spectral": {preset}}},
                "event": {{"r": 1.0}},
                "schedule": {{"kind": "power", "exponent": 1.4}},
                "n_grid": [100, 1000],
                "trials": 1000,
                "regime": "theorem1",
                "diagnostics": {{"quantile_replicates": 2000}}
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn max_cone_quantiles_match_closed_form() {
        let cfg = config(r#"{"kind": "max"}"#, r#"{"preset": "point-mass-direction"}"#);
        let law = ElementLaw::new(max_cone(), cfg.spec.clone()).unwrap();
        let r = sumconv_check(&law, &cfg).unwrap();
        for row in &r.rows {
            let exact = row.quantile_exact.unwrap();
            // Independent form: F(x)^n = 0.95 with F(x) = 1 − x^{-1.5}.
            let x = (1.0 - 0.95f64.powf(1.0 / row.n as f64)).powf(-1.0 / 1.5);
            assert!((exact - x / row.lambda_n).abs() < 1e-9 * exact);
            assert!((row.quantile_mc / exact - 1.0).abs() < 0.1);
            assert_eq!(row.bound_violations, 0);
        }
        assert!(r.decreasing);
    }

    #[test]
    fn polytope_norm_bound_holds() {
        let cfg = config(r#"{"kind": "convex_bodies"}"#, r#"{"preset": "random-triangle"}"#);
        let law = ElementLaw::new(convex_bodies_cone(2, PolytopeMetric::Hausdorff).unwrap(), cfg.spec.clone()).unwrap();
        let r = sumconv_check(&law, &cfg).unwrap();
        assert!(r.rows.iter().all(|row| row.bound_violations == 0 && row.quantile_exact.is_none()));
    }

    #[test]
    fn single_jump_consistency() {
        let spec = RegVarSpec::pareto(1.5, 1.0, SpectralPreset::default()).unwrap();
        let event = PolarEvent::new(1.0, DirectionPredicate::FullSphere).unwrap();
        let lambda = 100.0;
        let q: f64 = 1e-3;
        let exact = 1.0 - (1.0 - q).powi(10);
        let row = EstimateRow {
            n: 10,
            lambda_n: lambda,
            gamma_n: 100.0,
            p_hat: exact,
            ci_lo: exact,
            ci_hi: exact,
            gamma_p: 100.0 * exact,
            mu_u: 1.0,
            ratio: 100.0 * exact,
            single_jump_ref: 10.0 * q,
            trials_used: 0,
            exact: true,
        };
        let d = single_big_jump_diag(&max_cone(), &spec, &event, &[row], [0.7, 1.3]);
        assert!(d[0].consistent);
        assert!(d[0].relative_gap <= d[0].gap_bound.unwrap());
    }
}
