//! Experiment harness: repeated runs, best-of runs under a shared time
//! budget, and sweeps over the number of local-search iterations.
//!
//! Experiments are described by an [`ExperimentSpec`] (usually read from
//! JSON) and produce an [`AggregateReport`] that can be written as JSON or
//! CSV with [`emit_report`].

mod protocol;
mod report;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{load_csv, load_ppm_rgb, Dataset};
use crate::error::{Error, Result};
use crate::lloyd::LloydConfig;
use crate::pipelines::{AlgoConfig, Algorithm};

pub use protocol::{
    percentage_difference, protocol_repeated, protocol_single, protocol_time_budget, protocol_vary_z,
    run_seed, strict_wins, AVG_GRID_POINTS,
};
pub use report::{
    emit_report, emit_run_record, strip_timings, AggregateReport, AlgoSummary, AvgCurve, PairwiseDiff,
    VaryZRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Every algorithm once.
    Single,
    /// Every algorithm once per run, `R` runs with paired seeds.
    #[serde(rename = "repeated_r")]
    RepeatedR,
    /// Per run: `B` repetitions of the budget algorithm define a time budget
    /// that every other algorithm repeats within, keeping its best result.
    TimeBudget,
    /// Per run: the reference algorithms plus the varied algorithm at every
    /// `Z` of the grid, all from the same initial centers.
    VaryZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    #[default]
    Csv,
    Ppm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: DataFormat,
    #[serde(default)]
    pub has_header: bool,
}

impl DatasetSpec {
    pub fn load(&self) -> Result<Dataset> {
        match self.format {
            DataFormat::Csv => load_csv(&self.path, self.has_header),
            DataFormat::Ppm => load_ppm_rgb(&self.path),
        }
    }
}

/// One algorithm of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoEntry {
    /// Defaults to e.g. `"GFLS++ Z=15"`.
    #[serde(default)]
    pub label: Option<String>,
    pub algo: Algorithm,
    #[serde(default)]
    pub z: usize,
    #[serde(default)]
    pub greedy_l: Option<usize>,
}

impl AlgoEntry {
    pub fn new(algo: Algorithm, z: usize) -> Self {
        Self {
            label: None,
            algo,
            z,
            greedy_l: None,
        }
    }

    pub fn label(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None if self.algo.search() == crate::pipelines::Search::None => self.algo.label().to_string(),
            None => format!("{} Z={}", self.algo.label(), self.z),
        }
    }

    pub fn config(&self, k: usize, lloyd: LloydConfig, seed: u64) -> AlgoConfig {
        AlgoConfig {
            algorithm: self.algo,
            k,
            z: self.z,
            greedy_l: self.greedy_l,
            lloyd,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub dataset: Option<DatasetSpec>,
    pub k: usize,
    pub algorithms: Vec<AlgoEntry>,
    pub protocol: Protocol,
    /// `R`: number of runs.
    #[serde(default = "one")]
    pub repetitions: usize,
    /// `B`: repetitions of the budget algorithm per run.
    #[serde(default = "one")]
    pub budget_repetitions: usize,
    /// Label of the budget-defining algorithm; defaults to the first entry.
    #[serde(default)]
    pub budget_algorithm: Option<String>,
    /// Algorithm whose `Z` is swept by the vary-Z protocol.
    #[serde(default)]
    pub vary_algorithm: Option<Algorithm>,
    #[serde(default)]
    pub z_grid: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub lloyd: LloydConfig,
    #[serde(default)]
    pub reference_opt: Option<f64>,
    /// Run whole repetitions on worker threads (not allowed with time budgets).
    #[serde(default)]
    pub parallel: bool,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl ExperimentSpec {
    pub fn new(k: usize, algorithms: Vec<AlgoEntry>, protocol: Protocol) -> Self {
        Self {
            dataset: None,
            k,
            algorithms,
            protocol,
            repetitions: 1,
            budget_repetitions: 1,
            budget_algorithm: None,
            vary_algorithm: None,
            z_grid: Vec::new(),
            seed: 0,
            lloyd: LloydConfig::default(),
            reference_opt: None,
            parallel: false,
            output: None,
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() && self.protocol != Protocol::VaryZ {
            return Err(Error::NoAlgorithms);
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be >= 1".into()));
        }
        let mut labels: Vec<String> = self.algorithms.iter().map(AlgoEntry::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("algorithm labels must be unique".into()));
        }
        match self.protocol {
            Protocol::TimeBudget => {
                if self.parallel {
                    return Err(Error::Config(
                        "time-budget runs cannot use parallel mode".into(),
                    ));
                }
                if self.budget_repetitions == 0 {
                    return Err(Error::Config("budget repetitions B must be >= 1".into()));
                }
                self.budget_index()?;
            }
            Protocol::VaryZ => {
                if self.z_grid.is_empty() {
                    return Err(Error::Config("vary-z needs a non-empty z_grid".into()));
                }
                let algo = self.vary_algorithm.unwrap_or(Algorithm::Fls);
                if algo.search() == crate::pipelines::Search::None {
                    return Err(Error::Config(format!("{algo} has no local search to vary")));
                }
            }
            Protocol::Single | Protocol::RepeatedR => {}
        }
        Ok(())
    }

    /// Index of the single budget-defining algorithm.
    pub fn budget_index(&self) -> Result<usize> {
        let Some(name) = &self.budget_algorithm else {
            return if self.algorithms.is_empty() {
                Err(Error::NoAlgorithms)
            } else {
                Ok(0)
            };
        };
        let matches: Vec<usize> = self
            .algorithms
            .iter()
            .enumerate()
            .filter(|(_, a)| &a.label() == name)
            .map(|(i, _)| i)
            .collect();
        match matches.as_slice() {
            [i] => Ok(*i),
            [] => Err(Error::Config(format!("budget algorithm {name:?} not in the algorithm list"))),
            _ => Err(Error::Config(format!("budget algorithm {name:?} is ambiguous"))),
        }
    }
}

/// Validates the spec and dispatches on its protocol.
pub fn run_protocol(ds: &Dataset, spec: &ExperimentSpec) -> Result<AggregateReport> {
    spec.validate()?;
    match spec.protocol {
        Protocol::Single => protocol_single(ds, spec),
        Protocol::RepeatedR => protocol_repeated(ds, spec),
        Protocol::TimeBudget => protocol_time_budget(ds, spec),
        Protocol::VaryZ => protocol_vary_z(ds, spec),
    }
}

/// Loads the spec's dataset, runs the protocol and writes the report when an
/// output is configured. Returns the report and the files written.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<(AggregateReport, Vec<PathBuf>)> {
    spec.validate()?;
    let ds = spec
        .dataset
        .as_ref()
        .ok_or_else(|| Error::Config("experiment has no dataset".into()))?
        .load()?;
    let report = run_protocol(&ds, spec)?;
    let files = match &spec.output {
        Some(out) => emit_report(&report, out.format, &out.path)?,
        None => Vec::new(),
    };
    Ok((report, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_from_json_defaults() {
        let spec: ExperimentSpec = serde_json::from_str(
            r#"{"k": 5, "protocol": "time_budget",
                "algorithms": [{"algo": "gfls", "z": 5}, {"algo": "gkm"}],
                "dataset": {"path": "x.csv"}}"#,
        )
        .unwrap();
        assert_eq!(spec.repetitions, 1);
        assert_eq!(spec.budget_repetitions, 1);
        assert_eq!(spec.lloyd, LloydConfig::default());
        assert_eq!(spec.algorithms[0].label(), "GFLS++ Z=5");
        assert_eq!(spec.algorithms[1].label(), "GKM++");
        assert_eq!(spec.budget_index().unwrap(), 0);
        spec.validate().unwrap();
    }

    #[test]
    fn spec_validation() {
        let mut spec = ExperimentSpec::new(3, vec![], Protocol::RepeatedR);
        assert!(matches!(spec.validate(), Err(Error::NoAlgorithms)));
        spec.algorithms = vec![AlgoEntry::new(Algorithm::Km, 0), AlgoEntry::new(Algorithm::Km, 0)];
        assert!(matches!(spec.validate(), Err(Error::Config(_))));

        let mut spec = ExperimentSpec::new(
            3,
            vec![AlgoEntry::new(Algorithm::Fls, 5), AlgoEntry::new(Algorithm::Km, 0)],
            Protocol::TimeBudget,
        );
        spec.budget_repetitions = 0;
        assert!(spec.validate().is_err());
        spec.budget_repetitions = 2;
        spec.budget_algorithm = Some("nope".into());
        assert!(spec.validate().is_err());
        spec.budget_algorithm = Some("FLS++ Z=5".into());
        spec.validate().unwrap();
        spec.parallel = true;
        assert!(spec.validate().is_err());

        let mut spec = ExperimentSpec::new(3, vec![], Protocol::VaryZ);
        assert!(spec.validate().is_err());
        spec.z_grid = vec![1, 2];
        spec.validate().unwrap();
        spec.vary_algorithm = Some(Algorithm::Gkm);
        assert!(spec.validate().is_err());
    }
}
