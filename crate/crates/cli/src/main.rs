use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use minami_cli::config::{ExperimentKind, Format, Overrides};
use minami_cli::{execute, DEFAULT_OUT_DIR, OUT_DIR_ENV};

#[derive(Parser, Debug)]
#[command(name = "minami", version, about = "Monte Carlo and identity checks for random lattice Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment and write its records
    Run(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML config, a JSON config echo, or a JSON-lines result file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output file, directory, or `-` for stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum)]
    experiment: Option<ExperimentKind>,
    /// Directory for results when no output path is given
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    let overrides = Overrides {
        experiment: args.experiment,
        seed: args.seed,
        samples: args.samples,
        workers: args.workers,
        out: args.out,
        format: args.format,
    };
    match execute(args.config.as_deref(), &overrides, &args.out_dir) {
        Ok(summary) => {
            let target = summary
                .path
                .as_ref()
                .map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
            eprintln!(
                "{} records written to {target}; {} failed",
                summary.records.len(),
                summary.failures()
            );
            for r in summary.records.iter().filter(|r| r.failed()) {
                eprintln!("FAIL {}: {}", r.experiment, r.label);
            }
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("minami: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
