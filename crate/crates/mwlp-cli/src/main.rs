//! `mwlp <kind> --config <path> [--out <dir>] [--seed <u64>] [--grid-J <int>]`
//!
//! Runs one experiment per invocation and writes a JSON summary plus CSV
//! detail tables. Exit codes: 0 on success, 2 when the computation ran but
//! an assertion-suite check failed, 1 on operational errors.

use clap::{Args, Parser, Subcommand};
use mwlp_cli::config::{parse_config, ExperimentKind};
use mwlp_cli::{experiments, report};
use std::fs;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mwlp", version, about = "Matrix-weighted Littlewood-Paley experiments")]
struct Cli {
    #[command(subcommand)]
    kind: KindCommand,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to a key=value config file.
    #[arg(long)]
    config: Option<String>,
    /// Output directory (overrides the config key `out`).
    #[arg(long)]
    out: Option<String>,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid exponent override (N = 2^J samples per dimension).
    #[arg(long = "grid-J")]
    grid_j: Option<u32>,
}

#[derive(Subcommand)]
enum KindCommand {
    /// Matrix Muckenhoupt constant sweep with doubling and integral profiles.
    ApCheck(CommonArgs),
    /// Build and verify reducing operators.
    Reduce(CommonArgs),
    /// All quasi-norms of a seeded test function.
    Norms(CommonArgs),
    /// Four-norm equivalence ratios over the test family.
    Equivalence(CommonArgs),
    /// Wavelet characterization and hypothesis checks.
    Wavelet(CommonArgs),
    /// Sobolev equivalence and derivative reductions.
    Sobolev(CommonArgs),
    /// Weighted inequality suite (averaging, Carleson, almost-diagonal).
    Inequalities(CommonArgs),
    /// Riesz potential round trip and mapping ratios.
    Riesz(CommonArgs),
}

impl KindCommand {
    fn split(&self) -> (ExperimentKind, &CommonArgs) {
        match self {
            KindCommand::ApCheck(a) => (ExperimentKind::ApCheck, a),
            KindCommand::Reduce(a) => (ExperimentKind::Reduce, a),
            KindCommand::Norms(a) => (ExperimentKind::Norms, a),
            KindCommand::Equivalence(a) => (ExperimentKind::Equivalence, a),
            KindCommand::Wavelet(a) => (ExperimentKind::Wavelet, a),
            KindCommand::Sobolev(a) => (ExperimentKind::Sobolev, a),
            KindCommand::Inequalities(a) => (ExperimentKind::Inequalities, a),
            KindCommand::Riesz(a) => (ExperimentKind::Riesz, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.kind.split();

    let mut text = match &args.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {path}: {e}");
                return ExitCode::from(1);
            }
        },
        None => String::new(),
    };
    // Flag overrides append after the file contents, so they win.
    if let Some(out) = &args.out {
        text.push_str(&format!("\nout={out}\n"));
    }
    if let Some(seed) = args.seed {
        text.push_str(&format!("\nseed={seed}\n"));
    }
    if let Some(grid_j) = args.grid_j {
        text.push_str(&format!("\ngrid_j={grid_j}\n"));
    }

    let cfg = match parse_config(&text, Some(kind)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    match experiments::run(&cfg) {
        Ok(outcome) => {
            let path = match report::write_reports(&cfg, &outcome) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: cannot write reports: {e}");
                    return ExitCode::from(1);
                }
            };
            println!(
                "{}: {} (summary: {})",
                cfg.kind.name(),
                if outcome.pass { "pass" } else { "FAIL" },
                path.display()
            );
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
