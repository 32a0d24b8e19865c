//! Seeded synthetic point sets for tests and benchmark recipes.

use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::sampling::RngStream;

/// `n` points from `components` isotropic Gaussians whose means are drawn
/// uniformly from `[0, extent]^d`. Point `i` belongs to component
/// `i % components`.
pub fn gaussian_mixture(
    n: usize,
    d: usize,
    components: usize,
    extent: f64,
    sigma: f64,
    seed: u64,
) -> Dataset {
    assert!(components >= 1 && n >= 1 && d >= 1);
    let mut rng = RngStream::new(seed);
    let means: Vec<f64> = (0..components * d).map(|_| rng.next_f64() * extent).collect();
    let noise = Normal::new(0.0, sigma).expect("sigma must be finite and >= 0");
    let mut points = Vec::with_capacity(n * d);
    for i in 0..n {
        let c = i % components;
        for j in 0..d {
            points.push(means[c * d + j] + noise.sample(&mut rng));
        }
    }
    Dataset::new(points, d, format!("gauss-n{n}-d{d}-c{components}-s{seed}")).unwrap()
}

/// `n` points uniform in `[0, 1)^d`.
pub fn uniform(n: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = RngStream::new(seed);
    let points = (0..n * d).map(|_| rng.next_f64()).collect();
    Dataset::new(points, d, format!("uniform-n{n}-d{d}-s{seed}")).unwrap()
}

/// A `rows × cols` grid of axis-aligned rectangles in 2-d, each filled with
/// `per_cell` uniform points. Rectangles are `width × height` and their
/// lower-left corners sit on a lattice with spacing `pitch`.
pub fn rectangles(
    rows: usize,
    cols: usize,
    per_cell: usize,
    width: f64,
    height: f64,
    pitch: f64,
    seed: u64,
) -> Dataset {
    let mut rng = RngStream::new(seed);
    let mut points = Vec::with_capacity(rows * cols * per_cell * 2);
    for r in 0..rows {
        for c in 0..cols {
            for _ in 0..per_cell {
                points.push(c as f64 * pitch + rng.next_f64() * width);
                points.push(r as f64 * pitch + rng.next_f64() * height);
            }
        }
    }
    Dataset::new(points, 2, format!("rectangles-{rows}x{cols}-s{seed}")).unwrap()
}
