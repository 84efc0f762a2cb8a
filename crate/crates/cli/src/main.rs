use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nuelab_cli::config::{Config, ExperimentKind};
use nuelab_cli::{report, runner, CliError};

/// Simulation and estimation runner for non-uniformly expanding maps.
#[derive(Parser)]
#[command(name = "nuelab", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output bundle directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (overrides the config; any value yields identical
    /// results).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-orbit summaries: Birkhoff sums, expansion and recurrence
    /// statistics, hyperbolic times.
    Simulate(RunArgs),
    /// Hyperbolic-time densities over an ensemble of starts.
    Hyptimes(RunArgs),
    /// Empirical physical measure (histogram), optionally with basin
    /// clustering.
    Measure(RunArgs),
    /// Volumes of deviation sets over a time grid, with rate fit.
    Deviate(RunArgs),
    /// Escape-survivor volumes for a hole complement, with rate fit.
    Escape(RunArgs),
    /// Volumes of slow-recurrence tail sets, with rate fit.
    Tail(RunArgs),
    /// Exact variational rate bounds for a finite Markov model.
    Bound(RunArgs),
    /// Local-entropy versus Lyapunov-sum inequality check.
    #[command(name = "ruelle-check")]
    RuelleCheck(RunArgs),
    /// Merge bundle summaries into a comparison table.
    Report {
        /// Directory for comparison.csv.
        #[arg(long)]
        out: PathBuf,
        /// Bundle directories produced by the other subcommands.
        bundles: Vec<PathBuf>,
    },
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<(), CliError> {
    let cfg = Config::load(
        &args.config,
        kind,
        args.seed,
        args.workers,
        args.out.as_ref().and_then(|p| p.to_str()),
    )?;
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    let bundle = runner::run(&cfg, &out_dir)?;
    println!("wrote {}", bundle.summary_json.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match &cli.cmd {
        Cmd::Simulate(a) => run(ExperimentKind::Simulate, a),
        Cmd::Hyptimes(a) => run(ExperimentKind::Hyptimes, a),
        Cmd::Measure(a) => run(ExperimentKind::Measure, a),
        Cmd::Deviate(a) => run(ExperimentKind::Deviate, a),
        Cmd::Escape(a) => run(ExperimentKind::Escape, a),
        Cmd::Tail(a) => run(ExperimentKind::Tail, a),
        Cmd::Bound(a) => run(ExperimentKind::Bound, a),
        Cmd::RuelleCheck(a) => run(ExperimentKind::RuelleCheck, a),
        Cmd::Report { out, bundles } => {
            let table = report::report(bundles, out)?;
            print!("{table}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
