//! `conelab`: runs axiom suites, theorem experiments and analytic checks
//! from JSON configs.
//!
//! Exit status: 0 on PASS, 1 on FAIL or a failed declared axiom, 2 on a
//! configuration error, 3 on a regime violation, 4 when the Monte Carlo
//! budget is too small (unless `--allow-thin`).

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conelab::regvar::Regime;

use commands::{CliError, Outcome, RunFlags};

#[derive(Parser)]
#[command(name = "conelab", version, about = "Large deviations of heavy-tailed sums in convex cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the cone axioms on random triples
    Axioms(CommonArgs),
    /// Uncentered large-deviation experiment
    Theorem1(RunArgs),
    /// Centered large-deviation experiment
    Theorem2(RunArgs),
    /// Quantiles of the normalized sum norm along the n-grid
    Diagnostics(RunArgs),
    /// Karamata and truncated-moment ratios against their limits
    Karamata(KaramataArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file
    #[arg(long)]
    config: PathBuf,
    /// Directory for the outputs
    #[arg(long, default_value = "conelab-out")]
    out: PathBuf,
    /// Overrides the seed in the config
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (does not change results)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Report rows with fewer than 20 successes instead of failing
    #[arg(long)]
    allow_thin: bool,
}

#[derive(Args)]
struct KaramataArgs {
    /// JSON configuration file
    #[arg(long)]
    config: PathBuf,
    /// Directory for the outputs
    #[arg(long, default_value = "conelab-out")]
    out: PathBuf,
}

impl CommonArgs {
    fn flags(self, allow_thin: bool) -> RunFlags {
        RunFlags {
            config: self.config,
            out: self.out,
            seed: self.seed,
            threads: self.threads.map(|t| t as usize),
            allow_thin,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<Outcome, CliError> = match cli.command {
        Command::Axioms(a) => commands::axioms(&a.flags(false)),
        Command::Theorem1(a) => commands::theorem(&a.common.flags(a.allow_thin), Regime::Theorem1),
        Command::Theorem2(a) => commands::theorem(&a.common.flags(a.allow_thin), Regime::Theorem2),
        Command::Diagnostics(a) => commands::diagnostics(&a.common.flags(a.allow_thin)),
        Command::Karamata(a) => commands::karamata(&a.config, &a.out),
    };
    match result {
        Ok(o) => {
            println!("{}", o.message);
            ExitCode::from(if o.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("conelab: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
