use fls_core::lloyd::{lloyd, lloyd_step, LloydConfig};
use fls_core::pipelines::{run, run_fls_pp, run_kmeans_pp, run_ls_pp, seed_centers, AlgoConfig, Algorithm};
use fls_core::state::build_state;
use fls_core::synth::{gaussian_mixture, rectangles};
use fls_core::Dataset;

fn mean_cost(ds: &Dataset, algo: Algorithm, k: usize, z: usize, seeds: u64) -> f64 {
    (0..seeds)
        .map(|s| run(ds, &AlgoConfig::new(algo, k, z, s)).unwrap().record.final_cost)
        .sum::<f64>()
        / seeds as f64
}

/// Two tight triangles and a wider 3×2 grid above them, repeated `copies`
/// times far apart. Each copy wants exactly three centers.
fn double_cover(copies: usize) -> Dataset {
    let mut rows = Vec::new();
    for c in 0..copies {
        let ox = c as f64 * 1000.0;
        for cx in [0.0, 4.0] {
            for (a, b) in [(0.0, 0.0), (0.5, 0.0), (0.25, 0.4)] {
                rows.push([ox + cx + a, b]);
            }
        }
        for i in 0..3 {
            for j in 0..2 {
                rows.push([ox + 2.0 + i as f64 * 2.5, 10.0 + j as f64 * 2.5]);
            }
        }
    }
    Dataset::from_rows(&rows, "double-cover").unwrap()
}

#[test]
fn ls_beats_km_on_rectangle_grid() {
    let ds = rectangles(6, 6, 25, 1.0, 1.0, 3.0, 11);
    let km = mean_cost(&ds, Algorithm::Km, 36, 0, 50);
    let ls = mean_cost(&ds, Algorithm::Ls, 36, 25, 50);
    assert!(ls <= km, "LS++ {ls} vs KM++ {km}");
}

#[test]
fn fls_beats_ls_on_double_cover() {
    let ds = double_cover(4);
    let ls = mean_cost(&ds, Algorithm::Ls, 12, 25, 100);
    let fls = mean_cost(&ds, Algorithm::Fls, 12, 25, 100);
    assert!(fls <= ls, "FLS++ {fls} vs LS++ {ls}");
}

#[test]
fn fls_with_zero_iterations_is_seed_step_lloyd() {
    let ds = gaussian_mixture(600, 2, 6, 40.0, 2.0, 3);
    for seed in 0..5 {
        let cfg = AlgoConfig::new(Algorithm::Fls, 6, 0, seed);
        let out = run_fls_pp(&ds, &cfg).unwrap();
        let state = build_state(&ds, seed_centers(&ds, &cfg).unwrap());
        let state = lloyd_step(&ds, &state, cfg.lloyd.empty_policy).state;
        let (state, steps) = lloyd(&ds, state, &cfg.lloyd);
        assert_eq!(out.state.centers, state.centers);
        assert_eq!(out.record.lloyd_steps, steps + 1);
        assert_eq!(out.record.ls_iterations, 0);
    }
}

#[test]
fn ls_with_zero_iterations_is_kmeans_pp() {
    let ds = gaussian_mixture(600, 2, 6, 40.0, 2.0, 4);
    for seed in 0..5 {
        let km = run_kmeans_pp(&ds, &AlgoConfig::new(Algorithm::Km, 6, 0, seed)).unwrap();
        let ls = run_ls_pp(&ds, &AlgoConfig::new(Algorithm::Ls, 6, 0, seed)).unwrap();
        assert_eq!(km.state.centers, ls.state.centers);
        assert_eq!(km.record.final_cost, ls.record.final_cost);
    }
}

#[test]
fn records_are_consistent() {
    let ds = gaussian_mixture(800, 3, 8, 50.0, 3.0, 5);
    for algo in Algorithm::ALL {
        let out = run(&ds, &AlgoConfig::new(algo, 8, 7, 21)).unwrap();
        let r = &out.record;
        assert_eq!(r.trajectory.last().unwrap().1, r.final_cost);
        assert_eq!(r.final_cost, out.state.total_cost);
        let extra_step = usize::from(algo.search() == fls_core::pipelines::Search::Foresight);
        let searching = algo.search() != fls_core::pipelines::Search::None;
        assert_eq!(r.ls_iterations, if searching { 7 } else { 0 });
        // seeding, optional first Lloyd step, one mark per iteration, final Lloyd
        assert_eq!(r.trajectory.len(), 2 + extra_step + r.ls_iterations);
        assert!(r.trajectory.windows(2).all(|w| w[0].0 <= w[1].0));
        assert!(r.final_cost <= r.trajectory[0].1);
    }
}

#[test]
fn phase_costs_descend() {
    let ds = gaussian_mixture(1000, 2, 10, 60.0, 3.0, 6);
    for seed in 0..10 {
        let out = run(&ds, &AlgoConfig::new(Algorithm::Gls, 10, 10, seed)).unwrap();
        let t = &out.record.trajectory;
        let seeded = t[0].1;
        let after_search = t[t.len() - 2].1;
        assert!(after_search <= seeded);
        assert!(out.record.final_cost <= after_search * (1.0 + 1e-12));
    }
}

#[test]
fn greedy_variants_share_initial_centers() {
    let ds = gaussian_mixture(500, 2, 5, 30.0, 2.0, 7);
    for seed in [0, 5, 1 << 40] {
        let digests: Vec<String> = [Algorithm::Gkm, Algorithm::Gls, Algorithm::Gfls]
            .into_iter()
            .map(|a| run(&ds, &AlgoConfig::new(a, 5, 3, seed)).unwrap().record.init_digest)
            .collect();
        assert!(digests.windows(2).all(|w| w[0] == w[1]));
        let plain: Vec<String> = [Algorithm::Km, Algorithm::Ls, Algorithm::Fls]
            .into_iter()
            .map(|a| run(&ds, &AlgoConfig::new(a, 5, 3, seed)).unwrap().record.init_digest)
            .collect();
        assert!(plain.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(plain[0], digests[0]);
    }
}

#[test]
fn changing_z_keeps_the_seeding() {
    let ds = gaussian_mixture(500, 2, 5, 30.0, 2.0, 8);
    let a = run(&ds, &AlgoConfig::new(Algorithm::Fls, 5, 2, 3)).unwrap();
    let b = run(&ds, &AlgoConfig::new(Algorithm::Fls, 5, 20, 3)).unwrap();
    assert_eq!(a.record.init_digest, b.record.init_digest);
}

#[test]
fn capped_lloyd_is_respected() {
    let ds = gaussian_mixture(2000, 2, 15, 100.0, 8.0, 9);
    let mut cfg = AlgoConfig::new(Algorithm::Km, 15, 0, 1);
    cfg.lloyd = LloydConfig {
        max_steps: Some(2),
        rel_tol: 0.0,
        ..LloydConfig::default()
    };
    assert!(run(&ds, &cfg).unwrap().record.lloyd_steps <= 2);
}

#[test]
fn explicit_greedy_candidates() {
    let ds = gaussian_mixture(400, 2, 4, 30.0, 2.0, 10);
    let mut cfg = AlgoConfig::new(Algorithm::Gkm, 4, 0, 1);
    cfg.greedy_l = Some(7);
    assert_eq!(run(&ds, &cfg).unwrap().record.greedy_l, 7);
    cfg.algorithm = Algorithm::Km;
    assert!(run(&ds, &cfg).is_err());
    cfg.greedy_l = Some(1);
    assert_eq!(run(&ds, &cfg).unwrap().record.greedy_l, 1);
}
