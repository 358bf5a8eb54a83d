//! Experiment configuration, as read from JSON.

use serde::{Deserialize, Serialize};

use super::LabError;
use crate::cone::{ClaimsOverride, PolarEvent};
use crate::cones::{PolytopeMetric, TabulationGrid};
use crate::regvar::{LambdaSchedule, RegVarSpec, Regime};

/// Which cone an experiment runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConeConfig {
    Max {
        #[serde(default)]
        claims: ClaimsOverride,
    },
    ConvexBodies {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default = "hausdorff")]
        metric: PolytopeMetric,
        /// Number of grid directions; the dimension's default when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<usize>,
        #[serde(default)]
        claims: ClaimsOverride,
    },
    Functions {
        #[serde(default)]
        tabulation: TabulationGrid,
        #[serde(default)]
        claims: ClaimsOverride,
    },
    Union {
        #[serde(default = "one_dim")]
        dim: usize,
        #[serde(default)]
        claims: ClaimsOverride,
    },
}

fn two() -> usize {
    2
}

fn one_dim() -> usize {
    1
}

fn hausdorff() -> PolytopeMetric {
    PolytopeMetric::Hausdorff
}

impl ConeConfig {
    pub fn label(&self) -> &'static str {
        match self {
            ConeConfig::Max { .. } => "max",
            ConeConfig::ConvexBodies { .. } => "convex_bodies",
            ConeConfig::Functions { .. } => "functions",
            ConeConfig::Union { .. } => "union",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaKeyword {
    /// Use the closed form for the spectral preset and predicate.
    Analytic,
}

/// How `σ(B)` is obtained: a number, `{"estimate": N}` spectral draws, or
/// `"analytic"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaB {
    Value(f64),
    Estimate { estimate: u64 },
    Keyword(SigmaKeyword),
}

impl Default for SigmaB {
    fn default() -> Self {
        SigmaB::Keyword(SigmaKeyword::Analytic)
    }
}

/// The centering sequence `A_n` of the centered (Theorem 2) regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum CenteringMode {
    /// `A_n` is the neutral element.
    #[default]
    Zero,
    /// `I(A_n) = n m` for a supplied embedded mean `m`: a cone element, or
    /// raw embedded coordinates.
    EmbeddedMeanAnalytic { mean: serde_json::Value },
    /// `I(A_n) = n m̂` with `m̂` the average of `samples` embedded draws.
    EmbeddedMeanMc {
        #[serde(default = "million")]
        samples: u64,
    },
}

fn million() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed form where one exists, Monte Carlo otherwise.
    #[default]
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Replicates per n for the mean of `d(S_n, A_n)/λ_n`.
    #[serde(default = "ten_thousand")]
    pub centering_replicates: u64,
    /// Replicates per n for the quantile of `‖S_n‖/λ_n`.
    #[serde(default = "ten_thousand")]
    pub quantile_replicates: u64,
    #[serde(default = "level")]
    pub quantile_level: f64,
    /// Largest accepted final value of the quantile column.
    #[serde(default = "quantile_limit")]
    pub quantile_limit: f64,
    /// Largest accepted final value of the centering-distance column.
    #[serde(default = "centering_limit")]
    pub centering_limit: f64,
}

fn ten_thousand() -> u64 {
    10_000
}

fn level() -> f64 {
    0.95
}

fn quantile_limit() -> f64 {
    0.05
}

fn centering_limit() -> f64 {
    0.1
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            centering_replicates: ten_thousand(),
            quantile_replicates: ten_thousand(),
            quantile_level: level(),
            quantile_limit: quantile_limit(),
            centering_limit: centering_limit(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub cone: ConeConfig,
    pub spec: RegVarSpec,
    pub event: PolarEvent,
    #[serde(default)]
    pub sigma_b: SigmaB,
    pub schedule: LambdaSchedule,
    pub n_grid: Vec<u64>,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    pub regime: Regime,
    #[serde(default)]
    pub centering: CenteringMode,
    /// Accepted range of the ratio column.
    #[serde(default = "band")]
    pub band: [f64; 2],
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
}

fn band() -> [f64; 2] {
    [0.7, 1.3]
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that does not depend on the cone's algebra.
    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: String| Err(LabError::Config(m));
        self.spec.validate()?;
        self.event.validate()?;
        self.schedule.validate()?;
        if self.n_grid.is_empty() {
            return bad("n_grid must not be empty".into());
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("n_grid must be strictly increasing positive counts, got {:?}", self.n_grid));
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if !(self.band[0] < self.band[1] && self.band[0] >= 0.0) {
            return bad(format!("band must be an increasing pair of nonnegative numbers, got {:?}", self.band));
        }
        match self.sigma_b {
            SigmaB::Value(v) if !(0.0..=1.0).contains(&v) => bad(format!("sigma_b must lie in [0, 1], got {v}")),
            SigmaB::Estimate { estimate: 0 } => bad("sigma_b estimate needs at least one draw".into()),
            _ => Ok(()),
        }?;
        if let CenteringMode::EmbeddedMeanMc { samples: 0 } = self.centering {
            return bad("embedded_mean_mc needs at least one sample".into());
        }
        let d = &self.diagnostics;
        if d.centering_replicates == 0 || d.quantile_replicates == 0 || !(0.0..1.0).contains(&d.quantile_level) {
            return bad(format!("invalid diagnostics block {d:?}"));
        }
        Ok(())
    }
}

/// Execution settings that never change results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads; the global rayon pool when absent.
    pub threads: Option<usize>,
    /// Downgrades the success-count budget check to a warning.
    pub allow_thin: bool,
}
