use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fls_cli::{bench, exit_code, parse_args, render_summary};
use fls_core::bench::{OutputFormat, Protocol};

/// Run benchmark protocols described by a JSON experiment spec.
#[derive(Debug, Parser)]
#[command(name = "bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Best-of repetitions within the time used by B runs of the budget algorithm.
    TimeBudget(SpecArgs),
    /// Paired sweep over the number of local-search iterations.
    VaryZ(SpecArgs),
    /// R paired runs of every algorithm.
    Repeated(SpecArgs),
    /// Every algorithm once.
    Single(SpecArgs),
    /// Whatever protocol the spec names.
    Run(SpecArgs),
}

#[derive(Debug, Args)]
struct SpecArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the spec's output path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
}

fn main() -> ExitCode {
    let cli: Cli = match parse_args() {
        Ok(c) => c,
        Err(code) => return code,
    };
    let (protocol, args) = match cli.command {
        Command::TimeBudget(a) => (Some(Protocol::TimeBudget), a),
        Command::VaryZ(a) => (Some(Protocol::VaryZ), a),
        Command::Repeated(a) => (Some(Protocol::RepeatedR), a),
        Command::Single(a) => (Some(Protocol::Single), a),
        Command::Run(a) => (None, a),
    };
    match bench(&args.spec, protocol, args.out, args.format) {
        Ok((report, files)) => {
            print!("{}", render_summary(&report));
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
