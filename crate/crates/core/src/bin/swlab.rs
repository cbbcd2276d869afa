use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use swlab::cli::{self, CliError, JobKind, RunOptions, EXIT_USAGE};

#[derive(Parser)]
#[command(
    name = "swlab",
    version,
    about = "Cocanceling operators, weighted Stein-Weiss inequalities and Riesz potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML job configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's `out`, then $SWLAB_OUT_DIR, then ./swlab-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct MergeArgs {
    /// TOML job configuration listing the inputs.
    #[arg(long, required_unless_present = "paths")]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Record files or directories to merge.
    paths: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Checks an operator: cocanceling, canceling, ellipticity, projection maps.
    Op(Common),
    /// Evaluates weight conditions.
    Weights(Common),
    /// Evaluates a Riesz potential on a grid.
    Potential(Common),
    /// Runs an inequality or counterexample experiment.
    Experiment(Common),
    /// Merges run records into a summary.
    Merge(MergeArgs),
}

fn threads(n: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError {
                code: EXIT_USAGE,
                message: format!("--threads: {e}"),
            })?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<cli::RunRecord, CliError> {
    let (kind, c) = match cli.command {
        Command::Op(c) => (JobKind::OpCheck, c),
        Command::Weights(c) => (JobKind::WeightCheck, c),
        Command::Potential(c) => (JobKind::PotentialEval, c),
        Command::Experiment(c) => (JobKind::Experiment, c),
        Command::Merge(m) => {
            threads(m.threads)?;
            if let Some(config) = m.config {
                let opts = RunOptions {
                    out: m.out,
                    seed: m.seed,
                    expect: Some(JobKind::ReportMerge),
                };
                return cli::run(&config, &opts);
            }
            let out = m
                .out
                .or_else(|| std::env::var_os(cli::OUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(cli::DEFAULT_OUT_DIR));
            return cli::merge_to(&m.paths, &out);
        }
    };
    threads(c.threads)?;
    let opts = RunOptions {
        out: c.out,
        seed: c.seed,
        expect: Some(kind),
    };
    cli::run(&c.config, &opts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(record) => {
            let verdicts: Vec<String> = record.verdicts.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("{} {} [{}]", record.kind, record.config_hash, verdicts.join(", "));
            if let Some(c) = record.key_constant {
                println!("key_constant = {c}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
