//! Plain-text outputs: the estimate CSV, the gnuplot-style ratio table and
//! the norm-quantile CSV.

use std::io::Write;

use super::diagnostics::NormQuantileRow;
use super::run::EstimateRow;
use super::LabError;

/// Header of the estimate CSV, in column order.
pub const ESTIMATE_COLUMNS: [&str; 12] = [
    "n",
    "lambda_n",
    "gamma_n",
    "p_hat",
    "ci_lo",
    "ci_hi",
    "gamma_p",
    "mu_U",
    "ratio",
    "single_jump_ref",
    "trials_used",
    "exact",
];

pub fn write_estimates_csv<W: Write>(rows: &[EstimateRow], out: W) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(ESTIMATE_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Two whitespace-separated columns `n ratio`, one row per n.
pub fn write_ratio_dat<W: Write>(rows: &[EstimateRow], mut out: W) -> Result<(), LabError> {
    writeln!(out, "# n ratio")?;
    for r in rows {
        writeln!(out, "{} {}", r.n, r.ratio)?;
    }
    Ok(())
}

pub fn write_norm_quantiles_csv<W: Write>(rows: &[NormQuantileRow], out: W) -> Result<(), LabError> {
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record([
        "n",
        "lambda_n",
        "quantile_mc",
        "quantile_exact",
        "bound_violations",
        "replicates",
        "truncated_mean_ratio",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.lambda_n.to_string(),
            r.quantile_mc.to_string(),
            opt(r.quantile_exact),
            r.bound_violations.to_string(),
            r.replicates.to_string(),
            opt(r.truncated_mean_ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}
