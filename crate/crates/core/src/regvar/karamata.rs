//! Numerical checks of Karamata's theorem for regularly varying functions
//! and of the truncated-moment asymptotics it implies.

use serde::{Deserialize, Serialize};

use super::{power_integral, RegVarError, RegVarSpec, SlowlyVarying};
use crate::numeric::{integrate_log_scale, integrate_to_infinity, TailIntegral, INTEGRAL_RTOL};

/// A positive, regularly varying function on `[a, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KaramataFunction {
    /// `f(t) = t^exponent`.
    Power { exponent: f64 },
    /// `f(t) = t^exponent (1 + log t)^kappa`, for `t ≥ 1`.
    LogPower { exponent: f64, kappa: f64 },
    /// The radial tail `P(ζ > t)` of a spec.
    Tail { spec: RegVarSpec },
}

impl KaramataFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            KaramataFunction::Power { exponent } => t.powf(*exponent),
            KaramataFunction::LogPower { exponent, kappa } => t.powf(*exponent) * (1.0 + t.ln()).powf(*kappa),
            KaramataFunction::Tail { spec } => spec.tail_prob(t),
        }
    }

    /// Index of regular variation.
    pub fn rho(&self) -> f64 {
        match self {
            KaramataFunction::Power { exponent } | KaramataFunction::LogPower { exponent, .. } => *exponent,
            KaramataFunction::Tail { spec } => -spec.alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KaramataBranch {
    /// `β ≥ −(ρ+1)`: integral over `[a, x]`.
    Lower,
    /// `β < −(ρ+1)`: integral over `[x, ∞)`.
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KaramataQuery {
    pub f: KaramataFunction,
    pub beta: f64,
    pub a: f64,
    /// Branch to evaluate; chosen from `β` and `ρ` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<KaramataBranch>,
}

impl KaramataQuery {
    pub fn new(f: KaramataFunction, beta: f64, a: f64) -> Result<Self, RegVarError> {
        let q = Self { f, beta, a, branch: None };
        q.validate()?;
        Ok(q)
    }

    /// Evaluates `branch` regardless of `β`. The lower branch is rejected
    /// outside its range; the upper one fails at evaluation time when its
    /// integral diverges.
    pub fn with_branch(mut self, branch: KaramataBranch) -> Result<Self, RegVarError> {
        self.branch = Some(branch);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), RegVarError> {
        if !(self.a > 0.0 && self.a.is_finite() && self.beta.is_finite()) {
            return Err(RegVarError::InvalidBranch(format!(
                "need a > 0 and finite beta, got a = {}, beta = {}",
                self.a, self.beta
            )));
        }
        if let KaramataFunction::LogPower { .. } = self.f {
            if self.a < 1.0 {
                return Err(RegVarError::InvalidBranch("log-power functions need a >= 1".into()));
            }
        }
        if let KaramataFunction::Tail { spec } = &self.f {
            spec.validate()?;
        }
        if self.branch == Some(KaramataBranch::Lower) && self.beta < -(self.rho() + 1.0) {
            return Err(RegVarError::InvalidBranch(format!(
                "the lower branch needs beta >= -(rho + 1) = {}, got {}",
                -(self.rho() + 1.0),
                self.beta
            )));
        }
        Ok(())
    }

    pub fn rho(&self) -> f64 {
        self.f.rho()
    }

    pub fn branch(&self) -> KaramataBranch {
        if let Some(b) = self.branch {
            return b;
        }
        if self.beta >= -(self.rho() + 1.0) {
            KaramataBranch::Lower
        } else {
            KaramataBranch::Upper
        }
    }

    /// `β + ρ + 1` on the lower branch and `−(β + ρ + 1)` on the upper.
    pub fn limit(&self) -> f64 {
        let s = self.beta + self.rho() + 1.0;
        match self.branch() {
            KaramataBranch::Lower => s,
            KaramataBranch::Upper => -s,
        }
    }

    /// `x^{β+1} f(x) / ∫ t^β f(t) dt` over `[a, x]` or `[x, ∞)` by branch.
    pub fn ratio(&self, x: f64) -> Result<f64, RegVarError> {
        if !(x > self.a) {
            return Err(RegVarError::InvalidBranch(format!("x = {x} must exceed a = {}", self.a)));
        }
        let g = |t: f64| t.powf(self.beta) * self.f.eval(t);
        let top = x.powf(self.beta + 1.0) * self.f.eval(x);
        let integral = match self.branch() {
            KaramataBranch::Lower => integrate_log_scale(g, self.a, x, INTEGRAL_RTOL),
            KaramataBranch::Upper => match integrate_to_infinity(g, x, INTEGRAL_RTOL, 300) {
                TailIntegral::Converged(v) => v,
                TailIntegral::Diverged { last_fraction } => {
                    return Err(RegVarError::IntegralDiverges(format!(
                        "∫_x^∞ t^β f(t) dt: last decade still adds {last_fraction:.3e} of the total"
                    )))
                }
            },
        };
        Ok(top / integral)
    }
}

/// `γ ∫₀^T P(ζ > t) t^{γ−1} dt / (T^γ P(ζ > T))`, which tends to `γ/(γ − α)`.
pub fn truncated_moment_ratio(spec: &RegVarSpec, gamma: f64, t: f64) -> Result<f64, RegVarError> {
    spec.validate()?;
    if !(gamma > spec.alpha) {
        return Err(RegVarError::InvalidSpec(format!("gamma = {gamma} must exceed alpha = {}", spec.alpha)));
    }
    if !(t > spec.t_min) {
        return Err(RegVarError::InvalidSpec(format!("T = {t} must exceed t_min = {}", spec.t_min)));
    }
    // The tail equals 1 up to the knee and follows the power law beyond it.
    let moment = match spec.slowly_varying {
        SlowlyVarying::Constant { c } => {
            let knee = spec.t_min * c.max(1.0).powf(1.0 / spec.alpha);
            if t <= knee {
                t.powf(gamma)
            } else {
                let k = c * spec.t_min.powf(spec.alpha);
                knee.powf(gamma) + gamma * k * power_integral(gamma - 1.0 - spec.alpha, knee, t)
            }
        }
        SlowlyVarying::LogPower { .. } => {
            spec.t_min.powf(gamma)
                + gamma
                    * integrate_log_scale(
                        |s| spec.tail_prob(s) * s.powf(gamma - 1.0),
                        spec.t_min,
                        t,
                        INTEGRAL_RTOL,
                    )
        }
    };
    Ok(moment / (t.powf(gamma) * spec.tail_prob(t)))
}
