use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{OutputFormat, Protocol};
use crate::error::{Error, Result};
use crate::pipelines::{Algorithm, RunRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoSummary {
    pub label: String,
    pub algo: Algorithm,
    pub z: usize,
    pub runs: usize,
    pub min_cost: f64,
    pub mean_cost: f64,
    pub max_cost: f64,
    pub mean_time_ms: f64,
    /// Repetitions per run (1 outside the time-budget protocol).
    pub mean_repetitions: f64,
    pub mean_lloyd_steps: f64,
    pub mean_ls_iterations: f64,
    pub wins: usize,
    /// Largest time by which a competitor's final repetition ran past the budget.
    pub max_overshoot_ms: f64,
    /// Final (or best-of) cost of every run.
    pub run_costs: Vec<f64>,
}

/// `C(a1, a2) = (1 − c_a1 / c_a2) · 100` on mean costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseDiff {
    pub a1: String,
    pub a2: String,
    pub percent: f64,
}

/// Mean best-so-far cost over runs, sampled on the shared time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvgCurve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaryZRow {
    pub z: usize,
    pub mean_cost: f64,
    pub mean_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub protocol: Protocol,
    pub dataset: String,
    pub k: usize,
    pub runs: usize,
    pub summaries: Vec<AlgoSummary>,
    pub pairwise: Vec<PairwiseDiff>,
    pub avg_curves: Vec<AvgCurve>,
    pub vary_z: Vec<VaryZRow>,
    /// `t_B^r` per run for the time-budget protocol.
    pub budgets_ms: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_opt: Option<f64>,
    /// Every run record, for protocols that keep them.
    pub records: Vec<RunRecord>,
}

impl AggregateReport {
    pub fn summary(&self, label: &str) -> Option<&AlgoSummary> {
        self.summaries.iter().find(|s| s.label == label)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Zeroes every wall-clock quantity, leaving only the parts of a report that
/// are reproducible from the seeds.
pub fn strip_timings(report: &mut AggregateReport) {
    for s in &mut report.summaries {
        s.mean_time_ms = 0.0;
        s.max_overshoot_ms = 0.0;
    }
    for c in &mut report.avg_curves {
        c.points.iter_mut().for_each(|p| p.0 = 0.0);
    }
    for row in &mut report.vary_z {
        row.mean_time_ms = 0.0;
    }
    report.budgets_ms.iter_mut().for_each(|t| *t = 0.0);
    for r in &mut report.records {
        r.wall_time_ms = 0.0;
        r.trajectory.iter_mut().for_each(|p| p.0 = 0.0);
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes the report. JSON goes to `path`; CSV writes a summary table to
/// `path` plus `<stem>_avg.csv` (long-form `label,t_ms,avg_cost`),
/// `<stem>_pairwise.csv` and, for Z sweeps, `<stem>_vary_z.csv`.
pub fn emit_report(report: &AggregateReport, format: OutputFormat, path: &Path) -> Result<Vec<PathBuf>> {
    if report.summaries.is_empty() {
        return Err(Error::NoAlgorithms);
    }
    match format {
        OutputFormat::Json => {
            write(path, &report.to_json()?)?;
            Ok(vec![path.to_path_buf()])
        }
        OutputFormat::Csv => {
            let mut files = Vec::new();
            let mut out = String::from(
                "label,algo,z,runs,min_cost,mean_cost,max_cost,mean_time_ms,mean_repetitions,\
                 mean_lloyd_steps,mean_ls_iterations,wins,max_overshoot_ms\n",
            );
            for s in &report.summaries {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{:?}",
                    csv_field(&s.label),
                    s.algo.as_str(),
                    s.z,
                    s.runs,
                    s.min_cost,
                    s.mean_cost,
                    s.max_cost,
                    s.mean_time_ms,
                    s.mean_repetitions,
                    s.mean_lloyd_steps,
                    s.mean_ls_iterations,
                    s.wins,
                    s.max_overshoot_ms
                );
            }
            write(path, &out)?;
            files.push(path.to_path_buf());

            let mut avg = String::from("label,t_ms,avg_cost\n");
            for c in &report.avg_curves {
                for (t, v) in &c.points {
                    let _ = writeln!(avg, "{},{t:?},{v:?}", csv_field(&c.label));
                }
            }
            let avg_path = sibling(path, "avg");
            write(&avg_path, &avg)?;
            files.push(avg_path);

            let mut pw = String::from("a1,a2,percent\n");
            for p in &report.pairwise {
                let _ = writeln!(pw, "{},{},{:?}", csv_field(&p.a1), csv_field(&p.a2), p.percent);
            }
            let pw_path = sibling(path, "pairwise");
            write(&pw_path, &pw)?;
            files.push(pw_path);

            if !report.vary_z.is_empty() {
                let mut vz = String::from("z,mean_cost,mean_time_ms\n");
                for row in &report.vary_z {
                    let _ = writeln!(vz, "{},{:?},{:?}", row.z, row.mean_cost, row.mean_time_ms);
                }
                let vz_path = sibling(path, "vary_z");
                write(&vz_path, &vz)?;
                files.push(vz_path);
            }
            Ok(files)
        }
    }
}

/// Writes a single run. JSON follows the run-record schema; CSV writes one
/// summary row to `path` and the trajectory to `<stem>_trajectory.csv`.
pub fn emit_run_record(record: &RunRecord, format: OutputFormat, path: &Path) -> Result<Vec<PathBuf>> {
    match format {
        OutputFormat::Json => {
            write(path, &serde_json::to_string_pretty(record)?)?;
            Ok(vec![path.to_path_buf()])
        }
        OutputFormat::Csv => {
            let mut out = String::from(
                "algo,seed,k,z,greedy_l,final_cost,wall_time_ms,lloyd_steps,ls_iterations,init_digest\n",
            );
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:?},{:?},{},{},{}",
                record.algo.as_str(),
                record.seed,
                record.k,
                record.z,
                record.greedy_l,
                record.final_cost,
                record.wall_time_ms,
                record.lloyd_steps,
                record.ls_iterations,
                record.init_digest
            );
            write(path, &out)?;
            let mut traj = String::from("t_ms,cost\n");
            for (t, c) in &record.trajectory {
                let _ = writeln!(traj, "{t:?},{c:?}");
            }
            let traj_path = sibling(path, "trajectory");
            write(&traj_path, &traj)?;
            Ok(vec![path.to_path_buf(), traj_path])
        }
    }
}
