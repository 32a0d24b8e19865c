//! Lloyd iterations with a relative-improvement stopping rule.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::state::{build_state, sq_dist, Centers, ClusteringState};

/// Relative slack allowed when checking that a step did not increase cost.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// What happens to a center whose cluster has no members after assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EmptyPolicy {
    /// Leave the center where it was.
    #[serde(rename = "keep")]
    KeepOld,
    /// Move the center onto the point farthest from its nearest center
    /// (ties to the smallest point index); several empty clusters take
    /// successive farthest points.
    #[default]
    #[serde(rename = "farthest")]
    FarthestPoint,
}

impl std::str::FromStr for EmptyPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "keep" => Ok(EmptyPolicy::KeepOld),
            "farthest" => Ok(EmptyPolicy::FarthestPoint),
            other => Err(format!("unknown empty policy {other:?} (keep|farthest)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LloydConfig {
    /// Step cap; `None` runs until the stopping rule fires.
    pub max_steps: Option<usize>,
    /// Stop once `1 − Φ(C₂)/Φ(C₁) < rel_tol` for consecutive solutions.
    pub rel_tol: f64,
    pub empty_policy: EmptyPolicy,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self {
            max_steps: Some(300),
            rel_tol: 1e-4,
            empty_policy: EmptyPolicy::FarthestPoint,
        }
    }
}

/// Result of one Lloyd step.
#[derive(Debug, Clone)]
pub struct LloydStep {
    /// State rebuilt around the new centroids.
    pub state: ClusteringState,
    /// Nearest-center assignment of the input state, used to form the centroids.
    pub assignment: Vec<usize>,
    /// `Φ(P, C', φ)`: cost of the new centers under the old assignment.
    pub assigned_cost: f64,
}

/// Centroids of the input state's clusters, with empty clusters handled by
/// `policy`.
pub fn centroids_of(ds: &Dataset, state: &ClusteringState, policy: EmptyPolicy) -> Centers {
    let k = state.k();
    let mut next = state.centers.clone();
    let mut empties = Vec::new();
    for j in 0..k {
        let count = state.cluster_count[j];
        if count == 0 {
            empties.push(j);
            continue;
        }
        let inv = 1.0 / count as f64;
        for (c, s) in next.row_mut(j).iter_mut().zip(state.cluster_sum_row(j)) {
            *c = s * inv;
        }
    }
    if policy == EmptyPolicy::FarthestPoint && !empties.is_empty() {
        let mut order: Vec<usize> = (0..ds.n()).collect();
        order.sort_by(|&a, &b| state.dist1_sq[b].total_cmp(&state.dist1_sq[a]).then(a.cmp(&b)));
        for (j, &p) in empties.iter().zip(&order) {
            next.row_mut(*j).copy_from_slice(ds.point(p));
        }
    }
    next
}

pub fn lloyd_step(ds: &Dataset, state: &ClusteringState, policy: EmptyPolicy) -> LloydStep {
    let centers = centroids_of(ds, state, policy);
    let assigned_cost = ds
        .rows()
        .zip(&state.assign1)
        .map(|(p, &j)| sq_dist(p, centers.row(j)))
        .sum();
    LloydStep {
        state: build_state(ds, centers),
        assignment: state.assign1.clone(),
        assigned_cost,
    }
}

/// Iterates Lloyd steps until the relative improvement between consecutive
/// solutions drops below `rel_tol`, the cost reaches zero, or the cap is hit.
///
/// Returns the final state and the number of steps taken. Panics if a step
/// increases the cost beyond [`MONOTONE_SLACK`].
pub fn lloyd(ds: &Dataset, state: ClusteringState, cfg: &LloydConfig) -> (ClusteringState, usize) {
    let mut current = state;
    let mut steps = 0;
    loop {
        if cfg.max_steps.is_some_and(|cap| steps >= cap) || current.total_cost == 0.0 {
            return (current, steps);
        }
        let next = lloyd_step(ds, &current, cfg.empty_policy).state;
        steps += 1;
        let (prev_cost, new_cost) = (current.total_cost, next.total_cost);
        assert!(
            new_cost <= prev_cost * (1.0 + MONOTONE_SLACK),
            "Lloyd step increased cost from {prev_cost} to {new_cost}"
        );
        current = next;
        if 1.0 - new_cost / prev_cost < cfg.rel_tol {
            return (current, steps);
        }
    }
}
