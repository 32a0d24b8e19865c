//! Shared plumbing for the `cluster` and `bench` binaries.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use fls_core::bench::{emit_run_record, run_experiment, AggregateReport, ExperimentSpec, OutputFormat, Protocol};
use fls_core::dataset::{load_csv, load_ppm_rgb};
use fls_core::lloyd::{EmptyPolicy, LloydConfig};
use fls_core::pipelines::{run, AlgoConfig, Algorithm};
use fls_core::{Dataset, Error, Result};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;

pub fn exit_code(err: &Error) -> ExitCode {
    if err.is_input_error() {
        ExitCode::from(EXIT_INPUT)
    } else {
        ExitCode::from(EXIT_CONFIG)
    }
}

/// Arguments of a single clustering run.
#[derive(Debug, Clone)]
pub struct ClusterArgs {
    pub input: PathBuf,
    pub ppm: bool,
    pub header: bool,
    pub algo: Algorithm,
    pub k: usize,
    pub z: usize,
    pub greedy_l: Option<usize>,
    pub seed: u64,
    pub tol: f64,
    pub max_iters: Option<usize>,
    pub empty_policy: EmptyPolicy,
    pub opt: Option<f64>,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub centers_out: Option<PathBuf>,
}

pub fn load_input(path: &Path, ppm: bool, header: bool) -> Result<Dataset> {
    if ppm {
        load_ppm_rgb(path)
    } else {
        load_csv(path, header)
    }
}

pub fn cluster(args: &ClusterArgs) -> Result<Vec<PathBuf>> {
    let ds = load_input(&args.input, args.ppm, args.header)?;
    let cfg = AlgoConfig {
        algorithm: args.algo,
        k: args.k,
        z: args.z,
        greedy_l: args.greedy_l,
        lloyd: LloydConfig {
            max_steps: args.max_iters,
            rel_tol: args.tol,
            empty_policy: args.empty_policy,
        },
        seed: args.seed,
    };
    let mut out = run(&ds, &cfg)?;
    out.record.reference_opt = args.opt;
    let mut files = emit_run_record(&out.record, args.format, &args.out)?;
    if let Some(path) = &args.centers_out {
        let centers = Dataset::new(out.state.centers.as_slice().to_vec(), ds.dim(), "centers")?;
        centers.write_csv(path)?;
        files.push(path.clone());
    }
    Ok(files)
}

/// Loads the spec, forces `protocol`, applies output overrides and runs it.
pub fn bench(
    spec_path: &Path,
    protocol: Option<Protocol>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
) -> Result<(AggregateReport, Vec<PathBuf>)> {
    let mut spec = ExperimentSpec::from_json_file(spec_path)?;
    if let Some(p) = protocol {
        spec.protocol = p;
    }
    if let Some(path) = out {
        spec.output = Some(fls_core::bench::OutputSpec {
            path,
            format: format.unwrap_or_default(),
        });
    } else if let (Some(f), Some(o)) = (format, spec.output.as_mut()) {
        o.format = f;
    }
    // relative dataset paths resolve against the spec file's directory
    if let Some(ds) = spec.dataset.as_mut() {
        if ds.path.is_relative() {
            if let Some(dir) = spec_path.parent() {
                ds.path = dir.join(&ds.path);
            }
        }
    }
    run_experiment(&spec)
}

/// Human-readable summary table.
pub fn render_summary(report: &AggregateReport) -> String {
    let mut s = format!(
        "{} on {} (k={}, runs={})\n{:<18} {:>14} {:>14} {:>14} {:>10} {:>6}\n",
        match report.protocol {
            Protocol::Single => "single",
            Protocol::RepeatedR => "repeated",
            Protocol::TimeBudget => "time-budget",
            Protocol::VaryZ => "vary-z",
        },
        report.dataset,
        report.k,
        report.runs,
        "algorithm",
        "min",
        "mean",
        "max",
        "time[ms]",
        "wins"
    );
    for a in &report.summaries {
        s.push_str(&format!(
            "{:<18} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.2} {:>6}\n",
            a.label, a.min_cost, a.mean_cost, a.max_cost, a.mean_time_ms, a.wins
        ));
    }
    s
}

/// Parses the command line; usage errors exit with the config code instead of
/// clap's default.
pub fn parse_args<P: clap::Parser>() -> std::result::Result<P, ExitCode> {
    P::try_parse().map_err(|e| {
        let _ = e.print();
        if e.use_stderr() {
            ExitCode::from(EXIT_CONFIG)
        } else {
            ExitCode::SUCCESS
        }
    })
}
