//! Single-swap local search: the plain swap step and the foresight step that
//! scores each swap after one Lloyd step.
//!
//! Both evaluate all `k` swaps for a d²-sampled candidate in `O(ndk)` total by
//! reading each point's nearest and runner-up center from the state caches:
//! removing center `s` and inserting `c_new` into slot `s` sends a point to
//!
//! * `c_new` or its old nearest center, when that nearest center is not `s`;
//! * `c_new` or its runner-up, when its nearest center is `s`.
//!
//! Ties go to the smaller center index, with `c_new` occupying index `s`, so
//! the fast path agrees exactly with a from-scratch rebuild.
//!
//! The foresight cost `Φ(P, C', φ')` is assembled from per-cluster sums: with
//! `q_j = Σ_{p∈C_j} ‖p − r_j‖²` measured against the pre-step center `r_j`
//! (already cached as `dist1_sq`, `dist2_sq` or the distance to `c_new`),
//! the cost around the centroid `μ_j` is `q_j − |C_j|·‖μ_j − r_j‖²`.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::lloyd::{lloyd_step, EmptyPolicy};
use crate::sampling::{sample_center, RngStream};
use crate::state::{build_state, sq_dist, Centers, ClusteringState};

/// An evaluated swap of center `removed_center` for input point `inserted_point`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapEvaluation {
    pub removed_center: usize,
    pub inserted_point: usize,
    /// `Φ(P, C')` for the plain step, `Φ(P, C', φ')` for the foresight step.
    pub resulting_cost: f64,
}

/// One local-search iteration.
#[derive(Debug, Clone)]
pub struct Iteration {
    pub state: ClusteringState,
    /// `None` when every point sits on a center and nothing could be sampled.
    pub candidate: Option<usize>,
    /// The accepted swap, if any beat the no-swap baseline.
    pub accepted: Option<SwapEvaluation>,
}

impl Iteration {
    pub fn is_noop(&self) -> bool {
        self.candidate.is_none()
    }
}

fn require_two_centers(state: &ClusteringState) -> Result<()> {
    if state.k() < 2 {
        return Err(Error::Config("local search requires k >= 2".into()));
    }
    Ok(())
}

fn candidate_distances(ds: &Dataset, c_new: usize) -> Vec<f64> {
    let c = ds.point(c_new);
    ds.rows().map(|p| sq_dist(p, c)).collect()
}

/// Does `c_new` (placed at index `slot`) win against a center at `other`
/// with squared distances `d_new` and `d_other`?
#[inline]
fn new_wins(d_new: f64, slot: usize, d_other: f64, other: usize) -> bool {
    d_new < d_other || (d_new == d_other && slot < other)
}

/// `Φ(P, (C \ {c_s}) ∪ {c_new})` for every slot `s`, from the caches.
pub fn swap_costs(ds: &Dataset, state: &ClusteringState, c_new: usize) -> Vec<f64> {
    let dnew = candidate_distances(ds, c_new);
    (0..state.k())
        .map(|s| {
            (0..ds.n())
                .map(|p| {
                    let (a, d) = if state.assign1[p] != s {
                        (state.assign1[p], state.dist1_sq[p])
                    } else {
                        (state.assign2[p], state.dist2_sq[p])
                    };
                    if new_wins(dnew[p], s, d, a) {
                        dnew[p]
                    } else {
                        d
                    }
                })
                .sum()
        })
        .collect()
}

/// Plain local-search step for a given candidate: perform the best swap if it
/// strictly lowers `Φ`.
pub fn ls_step_with_candidate(
    ds: &Dataset,
    state: &ClusteringState,
    c_new: usize,
) -> Result<Iteration> {
    require_two_centers(state)?;
    let costs = swap_costs(ds, state, c_new);
    let mut best: Option<SwapEvaluation> = None;
    let mut best_cost = state.total_cost;
    for (s, &c) in costs.iter().enumerate() {
        if c < best_cost {
            best_cost = c;
            best = Some(SwapEvaluation {
                removed_center: s,
                inserted_point: c_new,
                resulting_cost: c,
            });
        }
    }
    let next = match best {
        Some(sw) => build_state(ds, state.centers.with_replaced(sw.removed_center, ds.point(c_new))),
        None => state.clone(),
    };
    Ok(Iteration {
        state: next,
        candidate: Some(c_new),
        accepted: best,
    })
}

/// Plain local-search iteration: d²-sample a candidate, then
/// [`ls_step_with_candidate`]. A no-op when sampling is degenerate.
pub fn ls_iteration(ds: &Dataset, state: &ClusteringState, rng: &mut RngStream) -> Result<Iteration> {
    require_two_centers(state)?;
    match sample_center(ds.n(), Some(&state.dist1_sq), rng) {
        Ok(c_new) => ls_step_with_candidate(ds, state, c_new),
        Err(Error::DegenerateSampling) => Ok(Iteration {
            state: state.clone(),
            candidate: None,
            accepted: None,
        }),
        Err(e) => Err(e),
    }
}

/// Per-cluster accumulators for one foresight evaluation.
#[derive(Clone)]
struct Aggregates {
    count: Vec<usize>,
    sum: Vec<f64>,
    /// Squared distances to the pre-step center, summed per cluster.
    q: Vec<f64>,
}

impl Aggregates {
    fn from_state(state: &ClusteringState) -> Self {
        let mut q = vec![0.0; state.k()];
        for (&a, &d) in state.assign1.iter().zip(&state.dist1_sq) {
            q[a] += d;
        }
        Self {
            count: state.cluster_count.clone(),
            sum: state.cluster_sum.clone(),
            q,
        }
    }

    fn clear(&mut self, j: usize, dim: usize) {
        self.count[j] = 0;
        self.q[j] = 0.0;
        self.sum[j * dim..(j + 1) * dim].fill(0.0);
    }

    fn add(&mut self, j: usize, point: &[f64], d: f64) {
        let dim = point.len();
        self.count[j] += 1;
        self.q[j] += d;
        for (s, x) in self.sum[j * dim..(j + 1) * dim].iter_mut().zip(point) {
            *s += x;
        }
    }

    fn remove(&mut self, j: usize, point: &[f64], d: f64) {
        let dim = point.len();
        self.count[j] -= 1;
        self.q[j] -= d;
        for (s, x) in self.sum[j * dim..(j + 1) * dim].iter_mut().zip(point) {
            *s -= x;
        }
    }

    /// `Σ_j Σ_{p∈C_j} ‖p − μ_j‖²` given the pre-step centers `refs`.
    fn centroid_cost(&self, refs: &Centers) -> f64 {
        let dim = refs.dim();
        let mut total = 0.0;
        for j in 0..refs.k() {
            let n = self.count[j];
            if n == 0 {
                continue;
            }
            let inv = 1.0 / n as f64;
            let shift: f64 = self.sum[j * dim..(j + 1) * dim]
                .iter()
                .zip(refs.row(j))
                .map(|(s, r)| {
                    let m = s * inv - r;
                    m * m
                })
                .sum();
            total += (self.q[j] - n as f64 * shift).max(0.0);
        }
        total
    }

    /// Centroids, keeping the pre-step position for empty clusters.
    fn centroids(&self, refs: &Centers) -> Centers {
        let dim = refs.dim();
        let mut out = refs.clone();
        for j in 0..refs.k() {
            let n = self.count[j];
            if n == 0 {
                continue;
            }
            let inv = 1.0 / n as f64;
            for (c, s) in out.row_mut(j).iter_mut().zip(&self.sum[j * dim..(j + 1) * dim]) {
                *c = s * inv;
            }
        }
        out
    }
}

/// Foresight scores for one candidate.
#[derive(Debug, Clone)]
pub struct ForesightEvaluation {
    pub candidate: usize,
    /// `Φ(P, C^min, φ^min)` of one Lloyd step without any swap.
    pub baseline_cost: f64,
    /// `Φ(P, C', φ')` of one Lloyd step after swapping out each center.
    pub swap_costs: Vec<f64>,
}

impl ForesightEvaluation {
    /// Index minimizing the swap cost, ties to the smallest index.
    pub fn best_swap(&self) -> (usize, f64) {
        let mut best = (0, self.swap_costs[0]);
        for (s, &c) in self.swap_costs.iter().enumerate().skip(1) {
            if c < best.1 {
                best = (s, c);
            }
        }
        best
    }

    /// The accepted swap: the best one, if it strictly beats the baseline.
    pub fn accepted(&self) -> Option<(usize, f64)> {
        let best = self.best_swap();
        (best.1 < self.baseline_cost).then_some(best)
    }
}

/// Precomputed pieces shared by all swaps of one foresight iteration.
struct Foresight<'a> {
    ds: &'a Dataset,
    state: &'a ClusteringState,
    c_new: usize,
    dnew: Vec<f64>,
    members: Vec<Vec<usize>>,
    /// Points at least as close to `c_new` as to their nearest center.
    attracted: Vec<usize>,
    base: Aggregates,
}

impl<'a> Foresight<'a> {
    fn new(ds: &'a Dataset, state: &'a ClusteringState, c_new: usize) -> Self {
        let dnew = candidate_distances(ds, c_new);
        let mut members = vec![Vec::new(); state.k()];
        let mut attracted = Vec::new();
        for p in 0..ds.n() {
            members[state.assign1[p]].push(p);
            if dnew[p] <= state.dist1_sq[p] {
                attracted.push(p);
            }
        }
        Self {
            ds,
            state,
            c_new,
            dnew,
            members,
            attracted,
            base: Aggregates::from_state(state),
        }
    }

    fn swapped_refs(&self, slot: usize) -> Centers {
        self.state
            .centers
            .with_replaced(slot, self.ds.point(self.c_new))
    }

    /// Cluster aggregates after assigning every point to its nearest center
    /// in `(C \ {c_slot}) ∪ {c_new}`.
    fn aggregates_for(&self, slot: usize, agg: &mut Aggregates) {
        let st = self.state;
        let dim = self.ds.dim();
        agg.clone_from(&self.base);
        agg.clear(slot, dim);
        for &p in &self.members[slot] {
            let point = self.ds.point(p);
            if new_wins(self.dnew[p], slot, st.dist2_sq[p], st.assign2[p]) {
                agg.add(slot, point, self.dnew[p]);
            } else {
                agg.add(st.assign2[p], point, st.dist2_sq[p]);
            }
        }
        for &p in &self.attracted {
            let a = st.assign1[p];
            if a != slot && new_wins(self.dnew[p], slot, st.dist1_sq[p], a) {
                let point = self.ds.point(p);
                agg.remove(a, point, st.dist1_sq[p]);
                agg.add(slot, point, self.dnew[p]);
            }
        }
    }

    fn evaluate(&self) -> ForesightEvaluation {
        let baseline_cost = self.base.centroid_cost(&self.state.centers);
        let mut agg = self.base.clone();
        let swap_costs = (0..self.state.k())
            .map(|slot| {
                self.aggregates_for(slot, &mut agg);
                agg.centroid_cost(&self.swapped_refs(slot))
            })
            .collect();
        ForesightEvaluation {
            candidate: self.c_new,
            baseline_cost,
            swap_costs,
        }
    }

    fn centers_after(&self, slot: Option<usize>) -> Centers {
        match slot {
            None => self.base.centroids(&self.state.centers),
            Some(s) => {
                let mut agg = self.base.clone();
                self.aggregates_for(s, &mut agg);
                agg.centroids(&self.swapped_refs(s))
            }
        }
    }
}

/// Scores the no-swap Lloyd step and all `k` swap-then-Lloyd-step options
/// for candidate `c_new` in `O(nd + nk + k²d)`.
pub fn evaluate_foresight(ds: &Dataset, state: &ClusteringState, c_new: usize) -> Result<ForesightEvaluation> {
    require_two_centers(state)?;
    Ok(Foresight::new(ds, state, c_new).evaluate())
}

/// Foresight step for a given candidate. The returned state is rebuilt around
/// the winning centroids; its cache refresh is the only full reassignment.
pub fn fls_step_with_candidate(
    ds: &Dataset,
    state: &ClusteringState,
    c_new: usize,
) -> Result<Iteration> {
    require_two_centers(state)?;
    let fs = Foresight::new(ds, state, c_new);
    let eval = fs.evaluate();
    let accepted = eval.accepted();
    let centers = fs.centers_after(accepted.map(|(s, _)| s));
    Ok(Iteration {
        state: build_state(ds, centers),
        candidate: Some(c_new),
        accepted: accepted.map(|(s, cost)| SwapEvaluation {
            removed_center: s,
            inserted_point: c_new,
            resulting_cost: cost,
        }),
    })
}

/// Foresight iteration: d²-sample a candidate, then
/// [`fls_step_with_candidate`]. A no-op when sampling is degenerate.
pub fn fls_iteration(ds: &Dataset, state: &ClusteringState, rng: &mut RngStream) -> Result<Iteration> {
    require_two_centers(state)?;
    match sample_center(ds.n(), Some(&state.dist1_sq), rng) {
        Ok(c_new) => fls_step_with_candidate(ds, state, c_new),
        Err(Error::DegenerateSampling) => Ok(Iteration {
            state: state.clone(),
            candidate: None,
            accepted: None,
        }),
        Err(e) => Err(e),
    }
}

/// Result of the from-scratch swap evaluation.
#[derive(Debug, Clone)]
pub struct NaiveSwap {
    pub removed_center: usize,
    pub cost: f64,
    pub centers: Centers,
}

/// Reference evaluation in `O(ndk²)`: for every slot, rebuild the state with
/// `c_new` swapped in, run one Lloyd step (empty clusters keep their position)
/// and score `Φ(P, C', φ')`. Returns the best slot, ties to the smallest.
pub fn naive_swap_oracle(ds: &Dataset, centers: &Centers, c_new: usize) -> NaiveSwap {
    assert!(centers.k() >= 2, "local search requires k >= 2");
    let mut best: Option<NaiveSwap> = None;
    for slot in 0..centers.k() {
        let swapped = build_state(ds, centers.with_replaced(slot, ds.point(c_new)));
        let step = lloyd_step(ds, &swapped, EmptyPolicy::KeepOld);
        if best.as_ref().is_none_or(|b| step.assigned_cost < b.cost) {
            best = Some(NaiveSwap {
                removed_center: slot,
                cost: step.assigned_cost,
                centers: step.state.centers,
            });
        }
    }
    best.expect("k >= 2")
}

/// `Φ(P, C^min, φ^min)` of one plain Lloyd step, computed from scratch.
pub fn naive_baseline_cost(ds: &Dataset, centers: &Centers) -> f64 {
    lloyd_step(ds, &build_state(ds, centers.clone()), EmptyPolicy::KeepOld).assigned_cost
}
