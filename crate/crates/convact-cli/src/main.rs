//! `convact`: batch experiment runner for the convolved-action library.
//!
//! Exit codes: 0 on success, 2 on configuration/validation errors, 3 on
//! solver failures (singular systems, size caps) and I/O trouble.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use convact::error::Error;
use convact::experiment::{self, ExperimentConfig, ExperimentKind, ExperimentReport, GridList};
use convact::solver::SolverOptions;

#[derive(Parser)]
#[command(
    name = "convact",
    about = "Run convolved-action experiments: identity suites, solver-vs-oracle studies, convergence tables",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run {
        /// Path to the experiment config (see the repository README for the schema).
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the built-in convolution / half-order identity suite.
    Identities {
        /// Comma-separated grid interval counts.
        #[arg(long, value_delimiter = ',', default_value = "128,256,512")]
        grids: Vec<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory for the report and CSV artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for the grid list (falls back to CONVACT_THREADS, then 1).
    #[arg(long)]
    threads: Option<usize>,
    /// Cap on dense-solve free nodes.
    #[arg(long, default_value_t = 6000)]
    max_free_nodes: usize,
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("CONVACT_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(1)
    .max(1)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::GridMismatch(_)
        | Error::Admissibility(_)
        | Error::Precondition(_) => 2,
        Error::SingularSystem { .. } | Error::FreeNodeCap { .. } | Error::Io(_) => 3,
    }
}

fn print_summary(report: &ExperimentReport) {
    println!("experiment '{}' ({:?})", report.label, report.kind);
    for row in &report.rows {
        let metrics: Vec<String> = row
            .metrics
            .iter()
            .map(|(k, v)| format!("{k}={v:.3e}"))
            .collect();
        println!(
            "  [{}] {} ({} ms)",
            row.resolution,
            metrics.join("  "),
            row.runtime_ms
        );
    }
    for (metric, orders) in &report.orders {
        let formatted: Vec<String> = orders.iter().map(|o| format!("{o:.2}")).collect();
        println!("  order({metric}): {}", formatted.join(", "));
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let (config, common) = match cli.command {
        Command::Run { config, common } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                Error::Config(format!("cannot read {}: {e}", config.display()))
            })?;
            (ExperimentConfig::from_json(&text)?, common)
        }
        Command::Identities { grids, common } => (
            ExperimentConfig {
                kind: ExperimentKind::Identities,
                label: "identities".into(),
                seed: 0,
                grids: GridList::Time(grids),
                sdof: None,
                bar: None,
            },
            common,
        ),
    };
    let opts = SolverOptions {
        max_free_nodes: common.max_free_nodes,
    };
    let threads = resolve_threads(common.threads);
    let report = experiment::run(&config, &common.out, &opts, threads)?;
    print_summary(&report);
    println!(
        "wrote {}_report.json and {}_data.csv under {}",
        report.label,
        report.label,
        common.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
