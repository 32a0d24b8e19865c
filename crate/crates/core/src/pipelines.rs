//! The six end-to-end algorithms: (G)KM++, (G)LS++ and (G)FLS++.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::lloyd::{lloyd, lloyd_step, LloydConfig};
use crate::localsearch::{fls_iteration, ls_iteration};
use crate::sampling::{default_greedy_candidates, greedy_d2_init, RngStream, SeedingConfig};
use crate::state::{build_state, Centers, ClusteringState};

/// Stream ids derived from a run's master seed. Keeping seeding and local
/// search on separate streams means changing `Z` never perturbs the seeding.
const SEEDING_STREAM: u64 = 0;
const SEARCH_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Km,
    Gkm,
    Ls,
    Gls,
    Fls,
    Gfls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Search {
    None,
    Swap,
    Foresight,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Km,
        Algorithm::Gkm,
        Algorithm::Ls,
        Algorithm::Gls,
        Algorithm::Fls,
        Algorithm::Gfls,
    ];

    pub fn is_greedy(self) -> bool {
        matches!(self, Algorithm::Gkm | Algorithm::Gls | Algorithm::Gfls)
    }

    pub fn search(self) -> Search {
        match self {
            Algorithm::Km | Algorithm::Gkm => Search::None,
            Algorithm::Ls | Algorithm::Gls => Search::Swap,
            Algorithm::Fls | Algorithm::Gfls => Search::Foresight,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Km => "KM++",
            Algorithm::Gkm => "GKM++",
            Algorithm::Ls => "LS++",
            Algorithm::Gls => "GLS++",
            Algorithm::Fls => "FLS++",
            Algorithm::Gfls => "GFLS++",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Km => "km",
            Algorithm::Gkm => "gkm",
            Algorithm::Ls => "ls",
            Algorithm::Gls => "gls",
            Algorithm::Fls => "fls",
            Algorithm::Gfls => "gfls",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s) || a.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoConfig {
    pub algorithm: Algorithm,
    pub k: usize,
    /// Local-search iterations; ignored by KM++/GKM++.
    pub z: usize,
    /// Greedy candidates per seeding round; defaults to `2 + ⌊ln k⌋` for the
    /// greedy variants and must be 1 (or unset) otherwise.
    pub greedy_l: Option<usize>,
    pub lloyd: LloydConfig,
    pub seed: u64,
}

impl AlgoConfig {
    pub fn new(algorithm: Algorithm, k: usize, z: usize, seed: u64) -> Self {
        Self {
            algorithm,
            k,
            z,
            greedy_l: None,
            lloyd: LloydConfig::default(),
            seed,
        }
    }

    pub fn effective_greedy_l(&self) -> usize {
        if self.algorithm.is_greedy() {
            self.greedy_l.unwrap_or_else(|| default_greedy_candidates(self.k))
        } else {
            1
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::Config(format!("k = {} must lie in [1, {n}]", self.k)));
        }
        match (self.algorithm.is_greedy(), self.greedy_l) {
            (true, Some(l)) if l < 2 => {
                return Err(Error::Config(format!(
                    "{} needs at least 2 greedy candidates, got {l}",
                    self.algorithm
                )))
            }
            (false, Some(l)) if l != 1 => {
                return Err(Error::Config(format!(
                    "{} does not use greedy candidates (got {l})",
                    self.algorithm
                )))
            }
            _ => {}
        }
        if self.algorithm.search() != Search::None && self.z > 0 && self.k < 2 {
            return Err(Error::Config("local search requires k >= 2".into()));
        }
        if self.lloyd.rel_tol.is_nan() || self.lloyd.rel_tol < 0.0 {
            return Err(Error::Config("relative tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

/// One algorithm execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algo: Algorithm,
    pub seed: u64,
    pub k: usize,
    pub z: usize,
    pub greedy_l: usize,
    pub empty_policy: crate::lloyd::EmptyPolicy,
    pub final_cost: f64,
    pub wall_time_ms: f64,
    pub lloyd_steps: usize,
    pub ls_iterations: usize,
    /// SHA-256 of the seeded centers, to verify shared initializations.
    pub init_digest: String,
    /// `(elapsed ms, cost)` at every phase boundary and local-search iteration.
    pub trajectory: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_opt: Option<f64>,
}

/// A finished run: its record and the final clustering.
#[derive(Debug, Clone)]
pub struct Run {
    pub record: RunRecord,
    pub state: ClusteringState,
}

pub fn centers_digest(centers: &Centers) -> String {
    let mut h = Sha256::new();
    h.update((centers.k() as u64).to_le_bytes());
    h.update((centers.dim() as u64).to_le_bytes());
    for x in centers.as_slice() {
        h.update(x.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

struct Recorder {
    start: Instant,
    trajectory: Vec<(f64, f64)>,
}

impl Recorder {
    fn new() -> Self {
        Self {
            start: Instant::now(),
            trajectory: Vec::new(),
        }
    }

    fn elapsed_ms(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1e3
    }

    fn mark(&mut self, cost: f64) {
        let t = self.elapsed_ms();
        self.trajectory.push((t, cost));
    }
}

/// Seeds centers according to the config, on the seeding sub-stream.
pub fn seed_centers(ds: &Dataset, cfg: &AlgoConfig) -> Result<Centers> {
    let mut rng = RngStream::substream(cfg.seed, SEEDING_STREAM);
    let seeding = SeedingConfig {
        k: cfg.k,
        greedy_candidates: cfg.effective_greedy_l(),
    };
    Ok(greedy_d2_init(ds, seeding, &mut rng)?.centers)
}

/// Dispatches on `cfg.algorithm`.
pub fn run(ds: &Dataset, cfg: &AlgoConfig) -> Result<Run> {
    cfg.validate(ds.n())?;
    let mut rec = Recorder::new();
    let seeded = seed_centers(ds, cfg)?;
    let init_digest = centers_digest(&seeded);
    let mut state = build_state(ds, seeded);
    rec.mark(state.total_cost);

    let mut lloyd_steps = 0;
    let mut ls_iterations = 0;
    let search = cfg.algorithm.search();

    if search == Search::Foresight {
        state = lloyd_step(ds, &state, cfg.lloyd.empty_policy).state;
        lloyd_steps += 1;
        rec.mark(state.total_cost);
    }
    if search != Search::None {
        let mut rng = RngStream::substream(cfg.seed, SEARCH_STREAM);
        for _ in 0..cfg.z {
            let it = match search {
                Search::Swap => ls_iteration(ds, &state, &mut rng)?,
                _ => fls_iteration(ds, &state, &mut rng)?,
            };
            state = it.state;
            ls_iterations += 1;
            rec.mark(state.total_cost);
        }
    }

    let (state, steps) = lloyd(ds, state, &cfg.lloyd);
    lloyd_steps += steps;
    rec.mark(state.total_cost);

    let record = RunRecord {
        algo: cfg.algorithm,
        seed: cfg.seed,
        k: cfg.k,
        z: if search == Search::None { 0 } else { cfg.z },
        greedy_l: cfg.effective_greedy_l(),
        empty_policy: cfg.lloyd.empty_policy,
        final_cost: state.total_cost,
        wall_time_ms: rec.elapsed_ms(),
        lloyd_steps,
        ls_iterations,
        init_digest,
        trajectory: rec.trajectory,
        reference_opt: None,
    };
    Ok(Run { record, state })
}

fn run_family(ds: &Dataset, cfg: &AlgoConfig, family: Search) -> Result<Run> {
    if cfg.algorithm.search() != family {
        return Err(Error::Config(format!(
            "{} is not handled by this pipeline",
            cfg.algorithm
        )));
    }
    run(ds, cfg)
}

/// Seeding (greedy for GKM++) followed by Lloyd to convergence.
pub fn run_kmeans_pp(ds: &Dataset, cfg: &AlgoConfig) -> Result<Run> {
    run_family(ds, cfg, Search::None)
}

/// Seeding, `Z` swap iterations, then Lloyd to convergence.
pub fn run_ls_pp(ds: &Dataset, cfg: &AlgoConfig) -> Result<Run> {
    run_family(ds, cfg, Search::Swap)
}

/// Seeding, one Lloyd step, `Z` foresight iterations, then Lloyd to convergence.
pub fn run_fls_pp(ds: &Dataset, cfg: &AlgoConfig) -> Result<Run> {
    run_family(ds, cfg, Search::Foresight)
}
