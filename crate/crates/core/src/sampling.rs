//! Seeded randomness, single-center d² draws, and the standard and greedy
//! k-means++ seedings.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::state::{sq_dist, Centers};

/// Deterministic random source.
///
/// Backed by ChaCha8 seeded through `seed_from_u64`, which is specified
/// bit-for-bit and independent of platform endianness or word size. Sub-streams
/// use ChaCha's 64-bit stream id, so `substream(seed, 0)` and
/// `substream(seed, 1)` never overlap.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw from `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from `[0, m)`. `m` must be positive.
    pub fn below(&mut self, m: usize) -> usize {
        assert!(m > 0, "empty range");
        self.inner.random_range(0..m as u64) as usize
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Parameters of a seeding run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedingConfig {
    pub k: usize,
    /// Candidates per round; 1 is plain d²-sampling.
    pub greedy_candidates: usize,
}

impl SeedingConfig {
    pub fn plain(k: usize) -> Self {
        Self {
            k,
            greedy_candidates: 1,
        }
    }

    /// Greedy seeding with the customary `2 + ⌊ln k⌋` candidates.
    pub fn greedy(k: usize) -> Self {
        Self {
            k,
            greedy_candidates: default_greedy_candidates(k),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::Config(format!(
                "k = {} must lie in [1, {n}]",
                self.k
            )));
        }
        if self.greedy_candidates == 0 {
            return Err(Error::Config("greedy candidate count must be >= 1".into()));
        }
        Ok(())
    }
}

pub fn default_greedy_candidates(k: usize) -> usize {
    2 + (k.max(1) as f64).ln().floor() as usize
}

/// Draws a point index with probability `dists[i] / Σ dists`, or uniformly
/// when `dists` is `None`.
///
/// Sums the weights, draws `r ∈ [0,1)`, then scans prefix sums until they
/// exceed `r·S`. Zero-weight points are never returned.
pub fn sample_center(n: usize, dists: Option<&[f64]>, rng: &mut RngStream) -> Result<usize> {
    let Some(dists) = dists else {
        return Ok(rng.below(n));
    };
    debug_assert_eq!(dists.len(), n);
    let total: f64 = dists.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::DegenerateSampling);
    }
    let target = rng.next_f64() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in dists.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if acc > target {
                return Ok(i);
            }
        }
    }
    // rounding left the running sum at or below r·S
    Ok(last_positive)
}

/// Outcome of a seeding run. `rounds` lists every candidate considered per
/// round with its resulting cost, for inspection in tests.
#[derive(Debug, Clone)]
pub struct Seeding {
    pub indices: Vec<usize>,
    pub centers: Centers,
    pub rounds: Vec<Vec<(usize, f64)>>,
}

/// Standard d²-sampling: first center uniform, the rest d²-weighted.
pub fn d2_init(ds: &Dataset, k: usize, rng: &mut RngStream) -> Result<Seeding> {
    greedy_d2_init(ds, SeedingConfig::plain(k), rng)
}

/// Greedy d²-sampling: each round draws `ℓ` i.i.d. candidates and keeps the
/// one that minimizes the cost of the enlarged center set (ties to the
/// smallest point index). With `ℓ = 1` this is exactly [`d2_init`] and
/// consumes the same random draws.
pub fn greedy_d2_init(ds: &Dataset, cfg: SeedingConfig, rng: &mut RngStream) -> Result<Seeding> {
    cfg.validate(ds.n())?;
    let n = ds.n();
    let ell = cfg.greedy_candidates;

    let mut indices = Vec::with_capacity(cfg.k);
    let mut rounds = Vec::with_capacity(cfg.k);
    let mut dists: Vec<f64> = Vec::new();
    let mut scratch = vec![0.0; n];
    let mut best_dists = vec![0.0; n];

    for round in 0..cfg.k {
        let weights = (round > 0).then_some(dists.as_slice());
        let mut candidates = Vec::with_capacity(ell);
        for _ in 0..ell {
            candidates.push(sample_center(n, weights, rng)?);
        }

        let mut considered = Vec::with_capacity(ell);
        let chosen = if ell == 1 {
            let c = candidates[0];
            fill_updated(ds, c, weights, &mut best_dists);
            considered.push((c, best_dists.iter().sum()));
            c
        } else {
            let mut best: Option<(usize, f64)> = None;
            for &c in &candidates {
                let cost = fill_updated(ds, c, weights, &mut scratch);
                considered.push((c, cost));
                let better = match best {
                    None => true,
                    Some((bi, bc)) => cost < bc || (cost == bc && c < bi),
                };
                if better {
                    best = Some((c, cost));
                    std::mem::swap(&mut scratch, &mut best_dists);
                }
            }
            best.expect("at least one candidate").0
        };

        indices.push(chosen);
        rounds.push(considered);
        std::mem::swap(&mut dists, &mut best_dists);
        if best_dists.len() != n {
            best_dists = vec![0.0; n];
        }
    }

    let centers = Centers::from_indices(ds, &indices);
    Ok(Seeding {
        indices,
        centers,
        rounds,
    })
}

/// Picks the candidate minimizing `Σ_p min(current[p], ‖p − c‖²)` (the cost
/// after adding it as a center), ties to the smallest point index. With no
/// current centers the cost is `Σ_p ‖p − c‖²`.
pub fn best_candidate(ds: &Dataset, current: Option<&[f64]>, candidates: &[usize]) -> (usize, f64) {
    let mut scratch = vec![0.0; ds.n()];
    let mut best: Option<(usize, f64)> = None;
    for &c in candidates {
        let cost = fill_updated(ds, c, current, &mut scratch);
        if best.is_none_or(|(bi, bc)| cost < bc || (cost == bc && c < bi)) {
            best = Some((c, cost));
        }
    }
    best.expect("at least one candidate")
}

/// Writes `min(current[p], ‖p − c‖²)` for every point into `out` and returns
/// the sum.
fn fill_updated(ds: &Dataset, c: usize, current: Option<&[f64]>, out: &mut [f64]) -> f64 {
    let center = ds.point(c);
    let mut total = 0.0;
    for (p, slot) in out.iter_mut().enumerate() {
        let d = sq_dist(ds.point(p), center);
        *slot = match current {
            Some(cur) => cur[p].min(d),
            None => d,
        };
        total += *slot;
    }
    total
}
