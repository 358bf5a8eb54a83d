//! Regularly varying random elements built by the polar construction
//! `ξ = ζ·η`: a heavy-tailed radius `ζ` acting on an independent direction
//! `η` of unit norm.

mod karamata;
mod schedule;
mod spectral;

pub use karamata::{truncated_moment_ratio, KaramataBranch, KaramataFunction, KaramataQuery};
pub use schedule::{validate_regime, LambdaSchedule, Regime, RegimeReport};
pub use spectral::{sigma_estimate, ElementLaw, Spectral, SpectralCone, SpectralPreset, SPECTRAL_NORM_TOL};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone::{ConeError, PolarEvent};
use crate::numeric::{adaptive_simpson, integrate_log_scale, INTEGRAL_RTOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegVarError {
    #[error("invalid tail specification: {0}")]
    InvalidSpec(String),
    #[error("tail probability vanishes at {lambda}")]
    DegenerateTail { lambda: f64 },
    #[error("spectral draw has norm {norm}, not 1")]
    SpectralNormViolation { norm: f64 },
    #[error("integral diverges: {0}")]
    IntegralDiverges(String),
    #[error("invalid Karamata query: {0}")]
    InvalidBranch(String),
    #[error("regime violation: {0}")]
    RegimeViolation(String),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// The slowly varying factor `L` of the radial tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SlowlyVarying {
    /// `c`, with `L ≡ 1`.
    Constant { c: f64 },
    /// `L(t) = (1 + log(t/t_min))^κ`.
    LogPower { kappa: f64 },
}

impl Default for SlowlyVarying {
    fn default() -> Self {
        SlowlyVarying::Constant { c: 1.0 }
    }
}

/// Law of `ξ = ζ·η` with `P(ζ > t) = min(1, c (t/t_min)^{-α} L(t))` for
/// `t ≥ t_min` and `1` below `t_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegVarSpec {
    pub alpha: f64,
    pub t_min: f64,
    #[serde(default)]
    pub slowly_varying: SlowlyVarying,
    #[serde(default)]
    pub spectral: SpectralPreset,
}

impl RegVarSpec {
    /// Pure Pareto radius with `c = 1` and the given spectral preset.
    pub fn pareto(alpha: f64, t_min: f64, spectral: SpectralPreset) -> Result<Self, RegVarError> {
        let s = Self {
            alpha,
            t_min,
            slowly_varying: SlowlyVarying::default(),
            spectral,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), RegVarError> {
        let bad = |m: String| Err(RegVarError::InvalidSpec(m));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive and finite, got {}", self.alpha));
        }
        if !(self.t_min > 0.0 && self.t_min.is_finite()) {
            return bad(format!("t_min must be positive and finite, got {}", self.t_min));
        }
        match self.slowly_varying {
            SlowlyVarying::Constant { c } if !(c > 0.0 && c.is_finite()) => {
                bad(format!("constant c must be positive and finite, got {c}"))
            }
            // The log factor may not outgrow the power near t_min, or the
            // tail would increase there.
            SlowlyVarying::LogPower { kappa } if !(kappa.is_finite() && kappa <= self.alpha) => {
                bad(format!("log power kappa must be finite and at most alpha, got {kappa}"))
            }
            _ => Ok(()),
        }
    }

    /// `P(ζ > t)`.
    pub fn tail_prob(&self, t: f64) -> f64 {
        if t < self.t_min {
            return 1.0;
        }
        let x = t / self.t_min;
        let v = match self.slowly_varying {
            SlowlyVarying::Constant { c } => c * x.powf(-self.alpha),
            SlowlyVarying::LogPower { kappa } => x.powf(-self.alpha) * (1.0 + x.ln()).powf(kappa),
        };
        v.min(1.0)
    }

    /// Smallest `t` with `P(ζ > t) ≤ v`, for `v ∈ (0, 1]`.
    pub fn inverse_tail(&self, v: f64) -> f64 {
        debug_assert!(v > 0.0 && v <= 1.0);
        match self.slowly_varying {
            SlowlyVarying::Constant { c } => self.t_min * (c / v).max(1.0).powf(1.0 / self.alpha),
            SlowlyVarying::LogPower { .. } => self.bisect_tail(v),
        }
    }

    fn bisect_tail(&self, v: f64) -> f64 {
        if self.tail_prob(self.t_min) <= v {
            return self.t_min;
        }
        let mut lo = self.t_min;
        let mut hi = self.t_min * 2.0;
        while self.tail_prob(hi) > v {
            lo = hi;
            hi *= 2.0;
        }
        // Invariant: tail(lo) > v ≥ tail(hi).
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.tail_prob(mid) > v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Inverse-transform draw of `ζ` from a uniform variate `u ∈ [0, 1)`.
    pub fn sample_radial(&self, u: f64) -> f64 {
        self.inverse_tail(1.0 - u)
    }

    pub fn draw_radial(&self, rng: &mut dyn RngCore) -> f64 {
        self.sample_radial(rng.random::<f64>())
    }

    /// `a_n`, the `1/n` tail quantile.
    pub fn a_n(&self, n: u64) -> f64 {
        assert!(n >= 1);
        self.inverse_tail(1.0 / n as f64)
    }

    /// `γ_n = (n P(ζ > λ))^{-1}`.
    pub fn gamma_n(&self, n: u64, lambda: f64) -> Result<f64, RegVarError> {
        let q = self.tail_prob(lambda);
        if !(q > 0.0) {
            return Err(RegVarError::DegenerateTail { lambda });
        }
        Ok(1.0 / (n as f64 * q))
    }

    /// Point where the capped tail first drops below 1.
    fn tail_knee(&self) -> f64 {
        match self.slowly_varying {
            SlowlyVarying::Constant { c } => self.t_min * c.max(1.0).powf(1.0 / self.alpha),
            SlowlyVarying::LogPower { .. } => self.t_min,
        }
    }

    /// `∫₀^T P(ζ > t) dt`.
    fn integrated_tail(&self, upper: f64) -> f64 {
        let knee = self.tail_knee();
        if upper <= knee {
            return upper;
        }
        match self.slowly_varying {
            SlowlyVarying::Constant { c } => {
                let k = c * self.t_min.powf(self.alpha);
                knee + k * power_integral(-self.alpha, knee, upper)
            }
            SlowlyVarying::LogPower { .. } => {
                knee + integrate_log_scale(|t| self.tail_prob(t), knee, upper, INTEGRAL_RTOL)
            }
        }
    }

    /// `E(ζ 1{ζ ≤ λ}) = ∫₀^λ P(ζ > t) dt − λ P(ζ > λ)`.
    pub fn truncated_mean(&self, lambda: f64) -> f64 {
        (self.integrated_tail(lambda) - lambda * self.tail_prob(lambda)).max(0.0)
    }

    /// `E ζ`, or [`RegVarError::IntegralDiverges`] when it is infinite.
    pub fn mean(&self) -> Result<f64, RegVarError> {
        let knee = self.tail_knee();
        match self.slowly_varying {
            SlowlyVarying::Constant { c } => {
                if self.alpha <= 1.0 {
                    return Err(RegVarError::IntegralDiverges(format!(
                        "E ζ is infinite for alpha = {}",
                        self.alpha
                    )));
                }
                Ok(knee + c * self.t_min.powf(self.alpha) * knee.powf(1.0 - self.alpha) / (self.alpha - 1.0))
            }
            SlowlyVarying::LogPower { kappa } => {
                // With t = t_min e^s the tail integral is
                // t_min ∫₀^∞ e^{(1−α)s} (1 + s)^κ ds.
                let diverges = || {
                    Err(RegVarError::IntegralDiverges(format!(
                        "E ζ is infinite for alpha = {}, kappa = {kappa}",
                        self.alpha
                    )))
                };
                if self.alpha < 1.0 {
                    return diverges();
                }
                if self.alpha == 1.0 {
                    return if kappa < -1.0 { Ok(knee + knee / (-kappa - 1.0)) } else { diverges() };
                }
                let beta = self.alpha - 1.0;
                let w_max = 750.0;
                let body = adaptive_simpson(|w: f64| (-w).exp() * (1.0 + w / beta).powf(kappa), 0.0, w_max, INTEGRAL_RTOL);
                Ok(knee + knee * body / beta)
            }
        }
    }
}

/// `∫_a^b t^p dt` for `0 < a ≤ b`.
pub(crate) fn power_integral(p: f64, a: f64, b: f64) -> f64 {
    if (p + 1.0).abs() < 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(p + 1.0) - a.powf(p + 1.0)) / (p + 1.0)
    }
}

/// `μ(U) = σ(B) r^{-α}` for the polar event `U = {‖x‖ > r, dir(x) ∈ B}`.
pub fn mu_polar(spec: &RegVarSpec, event: &PolarEvent, sigma_b: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&sigma_b));
    sigma_b * event.r.powf(-spec.alpha)
}
