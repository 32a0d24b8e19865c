use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fls_cli::{cluster, exit_code, parse_args, ClusterArgs};
use fls_core::bench::OutputFormat;
use fls_core::lloyd::EmptyPolicy;
use fls_core::pipelines::Algorithm;

/// Cluster a CSV or PPM point set with one of the k-means++ family algorithms.
#[derive(Debug, Parser)]
#[command(name = "cluster", version)]
struct Cli {
    /// Input file (CSV rows, or a P3/P6 image with --ppm).
    #[arg(long)]
    input: PathBuf,
    /// Treat the input as a PPM image of RGB points.
    #[arg(long)]
    ppm: bool,
    /// Skip the first CSV row.
    #[arg(long)]
    header: bool,
    /// km, gkm, ls, gls, fls or gfls.
    #[arg(long)]
    algo: Algorithm,
    #[arg(long)]
    k: usize,
    /// Local-search iterations.
    #[arg(long, default_value_t = 25)]
    z: usize,
    /// Greedy candidates per seeding round (default 2 + floor(ln k)).
    #[arg(long = "greedy-l")]
    greedy_l: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative-improvement stopping threshold for Lloyd's algorithm.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Cap on Lloyd steps in the final phase.
    #[arg(long = "max-iters", default_value_t = 300)]
    max_iters: usize,
    #[arg(long = "empty-policy", default_value = "farthest")]
    empty_policy: EmptyPolicy,
    /// Known optimal cost to record alongside the result.
    #[arg(long)]
    opt: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "json")]
    format: OutputFormat,
    /// Also write the final centers as CSV.
    #[arg(long = "centers-out")]
    centers_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli: Cli = match parse_args() {
        Ok(c) => c,
        Err(code) => return code,
    };
    let args = ClusterArgs {
        input: cli.input,
        ppm: cli.ppm,
        header: cli.header,
        algo: cli.algo,
        k: cli.k,
        z: cli.z,
        greedy_l: cli.greedy_l,
        seed: cli.seed,
        tol: cli.tol,
        max_iters: Some(cli.max_iters),
        empty_policy: cli.empty_policy,
        opt: cli.opt,
        out: cli.out,
        format: cli.format,
        centers_out: cli.centers_out,
    };
    match cluster(&args) {
        Ok(files) => {
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
