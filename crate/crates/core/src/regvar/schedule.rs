//! Large-deviation scaling sequences `λ_n` and the growth conditions each
//! limit theorem places on them.

use serde::{Deserialize, Serialize};

use super::{RegVarError, RegVarSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaSchedule {
    /// `λ_n = coeff · n^exponent`.
    Power {
        exponent: f64,
        #[serde(default = "unit")]
        coeff: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl LambdaSchedule {
    pub fn power(exponent: f64, coeff: f64) -> Self {
        LambdaSchedule::Power { exponent, coeff }
    }

    pub fn lambda(&self, n: u64) -> f64 {
        match *self {
            LambdaSchedule::Power { exponent, coeff } => coeff * (n as f64).powf(exponent),
        }
    }

    pub fn exponent(&self) -> f64 {
        match *self {
            LambdaSchedule::Power { exponent, .. } => exponent,
        }
    }

    pub fn validate(&self) -> Result<(), RegVarError> {
        match *self {
            LambdaSchedule::Power { exponent, coeff } => {
                if !(exponent.is_finite() && coeff > 0.0 && coeff.is_finite()) {
                    return Err(RegVarError::InvalidSpec(format!(
                        "power schedule needs finite exponent and positive coeff, got {exponent}, {coeff}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `γ_n P(S_n ∈ λ_n U) → μ(U)`.
    Theorem1,
    /// `γ_n P(S_n ∈ λ_n U + A_n) → μ(U)`.
    Theorem2,
}

/// Outcome of regime validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub exponent: f64,
    /// Lower bound the exponent must exceed.
    pub threshold: f64,
    pub condition: String,
    /// `(n/λ_n) E(ζ 1{ζ ≤ λ_n})` along the n-grid, reported when `α = 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated_mean_column: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

/// Checks the growth of `λ_n` against the regime and the tail index.
///
/// Theorem 1 needs `λ_n/a_n → ∞` for `α < 1`, `λ_n/n → ∞` for `α > 1`, and
/// for `α = 1` additionally that `(n/λ_n) E(ζ 1{ζ ≤ λ_n})` decreases along
/// the n-grid. Theorem 2 needs a finite mean (`α ≥ 1`, with a warning at
/// `α = 1`) and `λ_n / n^{max(1/α, 1/2)} → ∞`.
pub fn validate_regime(
    spec: &RegVarSpec,
    schedule: &LambdaSchedule,
    regime: Regime,
    n_grid: &[u64],
) -> Result<RegimeReport, RegVarError> {
    spec.validate()?;
    schedule.validate()?;
    let alpha = spec.alpha;
    let exponent = schedule.exponent();
    let mut warnings = Vec::new();
    let mut column = None;

    let (threshold, condition) = match regime {
        Regime::Theorem1 => {
            let t = 1f64.max(1.0 / alpha);
            let cond = if alpha < 1.0 {
                "lambda_n / a_n -> infinity (exponent > 1/alpha)"
            } else if alpha > 1.0 {
                "lambda_n / n -> infinity (exponent > 1)"
            } else {
                "lambda_n / n -> infinity and (n/lambda_n) E(|xi| 1{|xi| <= lambda_n}) -> 0"
            };
            (t, cond.to_string())
        }
        Regime::Theorem2 => {
            if alpha < 1.0 {
                return Err(RegVarError::RegimeViolation(format!(
                    "centered limit needs a finite mean, i.e. alpha >= 1, got alpha = {alpha}"
                )));
            }
            if alpha == 1.0 {
                let finite = spec.mean().is_ok();
                warnings.push(format!(
                    "alpha = 1 is a boundary case; the mean of this tail is {}",
                    if finite { "finite" } else { "infinite" }
                ));
            }
            (
                (1.0 / alpha).max(0.5),
                "lambda_n / n^max(1/alpha, 1/2) -> infinity (exponent > max(1/alpha, 1/2))".to_string(),
            )
        }
    };

    if !(exponent > threshold) {
        return Err(RegVarError::RegimeViolation(format!(
            "{condition}: exponent {exponent} does not exceed {threshold}"
        )));
    }

    if regime == Regime::Theorem1 && alpha == 1.0 {
        let values: Vec<f64> = n_grid
            .iter()
            .map(|&n| {
                let lambda = schedule.lambda(n);
                n as f64 / lambda * spec.truncated_mean(lambda)
            })
            .collect();
        if values.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(RegVarError::RegimeViolation(format!(
                "(n/lambda_n) E(|xi| 1{{|xi| <= lambda_n}}) does not decrease along the n-grid: {values:?}"
            )));
        }
        column = Some(values);
    }

    Ok(RegimeReport {
        regime,
        exponent,
        threshold,
        condition,
        truncated_mean_column: column,
        warnings,
    })
}
