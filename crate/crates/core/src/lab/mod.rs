//! Monte Carlo laboratory: configured experiments that estimate large
//! deviation probabilities of partial sums and compare them with their
//! predicted limits.

mod config;
mod diagnostics;
mod embed;
mod estimate;
mod report;
mod run;

pub use config::{
    CenteringMode, ConeConfig, DiagnosticsConfig, ExperimentConfig, Method, RunOptions, SigmaB, SigmaKeyword,
};
pub use diagnostics::{
    single_big_jump_diag, sumconv_check, CenteringDiagnostic, CenteringDistanceRow, NormQuantileRow,
    SingleJumpRow, SumConvReport,
};
pub use embed::{exact_max_cone_prob, Embeddable, LabCone};
pub use estimate::{
    bernoulli_coverage, centering_distance, embedded_mean, estimate_event_prob, replicate_count, replicate_map,
    shifted_member, Centering, Replicate,
};
pub use report::{write_estimates_csv, write_norm_quantiles_csv, write_ratio_dat, ESTIMATE_COLUMNS};
pub use run::{
    build_and_run, run_axioms, run_diagnostics, run_theorem, theorem_run_on, with_threads, CenteringReport,
    EstimateRow, SigmaReport, TheoremReport, Verdict,
};

use thiserror::Error;

use crate::cone::ConeError;
use crate::regvar::RegVarError;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("regime violation: {0}")]
    Regime(String),
    #[error(
        "budget too small at n = {n}: {successes} successes in {trials} trials (need 20); \
         raise `trials` or pass --allow-thin"
    )]
    BudgetTooSmall { n: u64, successes: u64, trials: u64 },
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    RegVar(RegVarError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<RegVarError> for LabError {
    fn from(e: RegVarError) -> Self {
        match e {
            RegVarError::RegimeViolation(m) => LabError::Regime(m),
            RegVarError::Cone(c) => LabError::Cone(c),
            other => LabError::RegVar(other),
        }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

/// Fewest observed successes accepted per Monte Carlo row.
pub const MIN_SUCCESSES: u64 = 20;

/// Trials in the axiom check run ahead of every theorem experiment.
pub const PREFLIGHT_TRIALS: u64 = 200;
