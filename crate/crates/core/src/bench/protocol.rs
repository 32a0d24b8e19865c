use std::time::Instant;

use rayon::prelude::*;

use super::report::{AggregateReport, AlgoSummary, AvgCurve, PairwiseDiff, VaryZRow};
use super::{AlgoEntry, ExperimentSpec, Protocol};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::pipelines::{run, Algorithm, RunRecord};

/// Number of samples on the shared time grid of the AVG(A, t) curves.
pub const AVG_GRID_POINTS: usize = 200;

/// Seed of repetition `i` in run `r`. Algorithms called with the same
/// `(r, i)` start from the same initial centers whenever they use the same
/// seeding.
pub fn run_seed(base: u64, r: usize, i: usize) -> u64 {
    base.wrapping_add((r as u64) << 32).wrapping_add(i as u64)
}

/// `(1 − a1/a2) · 100`.
pub fn percentage_difference(a1: f64, a2: f64) -> f64 {
    (1.0 - a1 / a2) * 100.0
}

/// Per-entry win counts: a run counts only for an entry whose cost is
/// strictly below every other entry's cost in that run.
///
/// `costs[a][r]` is the cost of entry `a` in run `r`.
pub fn strict_wins(costs: &[Vec<f64>]) -> Vec<usize> {
    let mut wins = vec![0; costs.len()];
    let runs = costs.first().map_or(0, Vec::len);
    for r in 0..runs {
        let best = (0..costs.len()).min_by(|&a, &b| costs[a][r].total_cmp(&costs[b][r]));
        if let Some(b) = best {
            let strict = (0..costs.len()).all(|a| a == b || costs[b][r] < costs[a][r]);
            if strict {
                wins[b] += 1;
            }
        }
    }
    wins
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn pairwise(summaries: &[AlgoSummary]) -> Vec<PairwiseDiff> {
    let mut out = Vec::with_capacity(summaries.len() * summaries.len());
    for a in summaries {
        for b in summaries {
            out.push(PairwiseDiff {
                a1: a.label.clone(),
                a2: b.label.clone(),
                percent: percentage_difference(a.mean_cost, b.mean_cost),
            });
        }
    }
    out
}

/// Per-entry results collected over runs.
struct Collected {
    label: String,
    algo: Algorithm,
    z: usize,
    costs: Vec<f64>,
    times: Vec<f64>,
    repetitions: Vec<f64>,
    lloyd_steps: Vec<f64>,
    ls_iterations: Vec<f64>,
    overshoot_ms: f64,
}

impl Collected {
    fn new(label: String, algo: Algorithm, z: usize) -> Self {
        Self {
            label,
            algo,
            z,
            costs: Vec::new(),
            times: Vec::new(),
            repetitions: Vec::new(),
            lloyd_steps: Vec::new(),
            ls_iterations: Vec::new(),
            overshoot_ms: 0.0,
        }
    }

    fn push_record(&mut self, r: &RunRecord) {
        self.costs.push(r.final_cost);
        self.times.push(r.wall_time_ms);
        self.repetitions.push(1.0);
        self.lloyd_steps.push(r.lloyd_steps as f64);
        self.ls_iterations.push(r.ls_iterations as f64);
    }

    fn summarize(self, wins: usize) -> AlgoSummary {
        AlgoSummary {
            label: self.label,
            algo: self.algo,
            z: self.z,
            runs: self.costs.len(),
            min_cost: self.costs.iter().cloned().fold(f64::INFINITY, f64::min),
            mean_cost: mean(&self.costs),
            max_cost: self.costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            mean_time_ms: mean(&self.times),
            mean_repetitions: mean(&self.repetitions),
            mean_lloyd_steps: mean(&self.lloyd_steps),
            mean_ls_iterations: mean(&self.ls_iterations),
            wins,
            max_overshoot_ms: self.overshoot_ms,
            run_costs: self.costs,
        }
    }
}

fn finish(
    ds: &Dataset,
    spec: &ExperimentSpec,
    collected: Vec<Collected>,
    records: Vec<RunRecord>,
) -> AggregateReport {
    let costs: Vec<Vec<f64>> = collected.iter().map(|c| c.costs.clone()).collect();
    let wins = strict_wins(&costs);
    let summaries: Vec<AlgoSummary> = collected
        .into_iter()
        .zip(wins)
        .map(|(c, w)| c.summarize(w))
        .collect();
    AggregateReport {
        protocol: spec.protocol,
        dataset: ds.name().to_string(),
        k: spec.k,
        runs: spec.repetitions,
        pairwise: pairwise(&summaries),
        summaries,
        avg_curves: Vec::new(),
        vary_z: Vec::new(),
        budgets_ms: Vec::new(),
        reference_opt: spec.reference_opt,
        records,
    }
}

fn with_opt(mut rec: RunRecord, opt: Option<f64>) -> RunRecord {
    rec.reference_opt = opt;
    rec
}

/// Runs every entry once per run (with run seed `r`), optionally spreading
/// whole runs across threads. Results are collected in run order.
fn paired_runs(
    ds: &Dataset,
    spec: &ExperimentSpec,
    entries: &[AlgoEntry],
    runs: usize,
) -> Result<Vec<Vec<RunRecord>>> {
    let one_run = |r: usize| -> Result<Vec<RunRecord>> {
        let seed = run_seed(spec.seed, r, 0);
        entries
            .iter()
            .map(|e| {
                run(ds, &e.config(spec.k, spec.lloyd, seed)).map(|out| with_opt(out.record, spec.reference_opt))
            })
            .collect()
    };
    if spec.parallel {
        (0..runs).into_par_iter().map(one_run).collect()
    } else {
        (0..runs).map(one_run).collect()
    }
}

fn repeated(ds: &Dataset, spec: &ExperimentSpec, runs: usize) -> Result<AggregateReport> {
    let per_run = paired_runs(ds, spec, &spec.algorithms, runs)?;
    let mut collected: Vec<Collected> = spec
        .algorithms
        .iter()
        .map(|e| Collected::new(e.label(), e.algo, e.z))
        .collect();
    let mut records = Vec::with_capacity(runs * spec.algorithms.len());
    for run_records in per_run {
        for (c, rec) in collected.iter_mut().zip(run_records) {
            c.push_record(&rec);
            records.push(rec);
        }
    }
    Ok(finish(ds, spec, collected, records))
}

/// Every algorithm once, from run seed 0.
pub fn protocol_single(ds: &Dataset, spec: &ExperimentSpec) -> Result<AggregateReport> {
    spec.validate()?;
    let mut report = repeated(ds, spec, 1)?;
    report.runs = 1;
    Ok(report)
}

/// `R` paired runs of every algorithm.
pub fn protocol_repeated(ds: &Dataset, spec: &ExperimentSpec) -> Result<AggregateReport> {
    spec.validate()?;
    repeated(ds, spec, spec.repetitions)
}

/// Best-so-far cost over cumulative time within one run of one algorithm.
struct Timeline {
    events: Vec<(f64, f64)>,
}

impl Timeline {
    fn first_time(&self) -> f64 {
        self.events[0].0
    }

    fn last_time(&self) -> f64 {
        self.events[self.events.len() - 1].0
    }

    fn at(&self, t: f64) -> f64 {
        let idx = self.events.partition_point(|e| e.0 <= t);
        self.events[idx.max(1) - 1].1
    }
}

/// Best-of repetitions: the budget algorithm runs `B` times per run and its
/// total time `t_B^r` becomes the budget; every other algorithm starts a new
/// repetition while its elapsed time is below `t_B^r`, always completing at
/// least one. Reports best-of costs, strict wins, mean repetition counts,
/// the largest budget overshoot and AVG(A, t) curves.
pub fn protocol_time_budget(ds: &Dataset, spec: &ExperimentSpec) -> Result<AggregateReport> {
    spec.validate()?;
    let budget_idx = spec.budget_index()?;
    let entries = &spec.algorithms;
    let mut collected: Vec<Collected> = entries
        .iter()
        .map(|e| Collected::new(e.label(), e.algo, e.z))
        .collect();
    let mut timelines: Vec<Vec<Timeline>> = entries.iter().map(|_| Vec::new()).collect();
    let mut budgets = Vec::with_capacity(spec.repetitions);

    for r in 0..spec.repetitions {
        let mut order: Vec<usize> = vec![budget_idx];
        order.extend((0..entries.len()).filter(|&i| i != budget_idx));
        let mut budget = 0.0;
        for a in order {
            let entry = &entries[a];
            let mut elapsed = 0.0;
            let mut best = f64::INFINITY;
            let mut events = Vec::new();
            let (mut lloyd_steps, mut ls_iterations) = (0.0, 0.0);
            let mut reps = 0usize;
            loop {
                let keep_going = if a == budget_idx {
                    reps < spec.budget_repetitions
                } else {
                    reps == 0 || elapsed < budget
                };
                if !keep_going {
                    break;
                }
                let cfg = entry.config(spec.k, spec.lloyd, run_seed(spec.seed, r, reps));
                let start = Instant::now();
                let out = run(ds, &cfg)?;
                elapsed += start.elapsed().as_secs_f64() * 1e3;
                best = best.min(out.record.final_cost);
                events.push((elapsed, best));
                lloyd_steps += out.record.lloyd_steps as f64;
                ls_iterations += out.record.ls_iterations as f64;
                reps += 1;
            }
            if a == budget_idx {
                budget = elapsed;
                budgets.push(budget);
            } else {
                let c = &mut collected[a];
                c.overshoot_ms = c.overshoot_ms.max(elapsed - budget);
            }
            let c = &mut collected[a];
            c.costs.push(best);
            c.times.push(elapsed);
            c.repetitions.push(reps as f64);
            c.lloyd_steps.push(lloyd_steps / reps as f64);
            c.ls_iterations.push(ls_iterations / reps as f64);
            timelines[a].push(Timeline { events });
        }
    }

    let avg_curves = avg_curves(&collected, &timelines);
    let mut report = finish(ds, spec, collected, Vec::new());
    report.avg_curves = avg_curves;
    report.budgets_ms = budgets;
    Ok(report)
}

/// AVG(A, t) on a shared log-spaced grid from the first time every algorithm
/// has finished in every run to the latest finish.
fn avg_curves(collected: &[Collected], timelines: &[Vec<Timeline>]) -> Vec<AvgCurve> {
    let all = timelines.iter().flatten();
    let t_min = all.clone().map(Timeline::first_time).fold(0.0, f64::max).max(1e-6);
    let t_max = all.map(Timeline::last_time).fold(t_min, f64::max);
    let mut grid: Vec<f64> = (0..AVG_GRID_POINTS)
        .map(|i| {
            let frac = i as f64 / (AVG_GRID_POINTS - 1) as f64;
            (t_min.ln() + frac * (t_max.ln() - t_min.ln())).exp()
        })
        .map(|t| t.clamp(t_min, t_max))
        .collect();
    // exp(ln t) may round below t_max and drop the final events
    grid[AVG_GRID_POINTS - 1] = t_max;
    collected
        .iter()
        .zip(timelines)
        .map(|(c, lines)| AvgCurve {
            label: c.label.clone(),
            points: grid
                .iter()
                .map(|&t| (t, lines.iter().map(|l| l.at(t)).sum::<f64>() / lines.len() as f64))
                .collect(),
        })
        .collect()
}

/// Paired sweep over `Z`: per run, the reference algorithms and the varied
/// algorithm at every grid value start from the same initial centers.
pub fn protocol_vary_z(ds: &Dataset, spec: &ExperimentSpec) -> Result<AggregateReport> {
    spec.validate()?;
    let varied = spec.vary_algorithm.unwrap_or(Algorithm::Fls);
    let mut entries = spec.algorithms.clone();
    let first_varied = entries.len();
    entries.extend(spec.z_grid.iter().map(|&z| AlgoEntry {
        label: Some(format!("{} Z={z}", varied.label())),
        algo: varied,
        z,
        greedy_l: None,
    }));
    let sweep = ExperimentSpec {
        algorithms: entries,
        protocol: Protocol::RepeatedR,
        ..spec.clone()
    };
    sweep.validate()?;
    let mut report = repeated(ds, &sweep, spec.repetitions)?;
    report.protocol = Protocol::VaryZ;
    report.vary_z = report.summaries[first_varied..]
        .iter()
        .map(|s| VaryZRow {
            z: s.z,
            mean_cost: s.mean_cost,
            mean_time_ms: s.mean_time_ms,
        })
        .collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentage_matches_table_value() {
        let c = percentage_difference(2.4773e5, 3.1913e5);
        assert!((c - 22.37).abs() < 0.01, "{c}");
        assert_eq!(percentage_difference(5.0, 5.0), 0.0);
    }

    #[test]
    fn wins_require_strictness() {
        let costs = vec![vec![1.0, 2.0, 3.0], vec![1.0, 1.0, 4.0], vec![2.0, 3.0, 3.0]];
        // run 0: tie between 0 and 1 -> nobody; run 1: entry 1; run 2: tie 0/2
        assert_eq!(strict_wins(&costs), vec![0, 1, 0]);
        let same = vec![vec![1.0, 2.0], vec![1.0, 2.0]];
        assert_eq!(strict_wins(&same), vec![0, 0]);
    }

    #[test]
    fn timeline_lookup() {
        let t = Timeline {
            events: vec![(1.0, 10.0), (2.0, 8.0), (4.0, 8.0), (5.0, 3.0)],
        };
        assert_eq!(t.at(1.0), 10.0);
        assert_eq!(t.at(3.9), 8.0);
        assert_eq!(t.at(100.0), 3.0);
    }

    #[test]
    fn seeds_are_distinct() {
        assert_ne!(run_seed(0, 0, 1), run_seed(0, 1, 0));
        assert_eq!(run_seed(7, 0, 0), 7);
    }
}
