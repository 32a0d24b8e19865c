//! Clustering state with first- and second-nearest center caches.
//!
//! Every argmin over centers breaks ties by the smallest center index, so a
//! state is a pure function of `(dataset, centers)`.

use crate::dataset::Dataset;

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `k` centers of dimension `d`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Centers {
    data: Vec<f64>,
    dim: usize,
}

impl Centers {
    pub fn new(data: Vec<f64>, dim: usize) -> Self {
        assert!(dim > 0 && data.len().is_multiple_of(dim), "ragged center matrix");
        assert!(data.iter().all(|x| x.is_finite()), "non-finite center");
        Self { data, dim }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(1);
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(data, dim)
    }

    /// Copies the given input points.
    pub fn from_indices(ds: &Dataset, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * ds.dim());
        for &i in indices {
            data.extend_from_slice(ds.point(i));
        }
        Self::new(data, ds.dim())
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Copy with center `slot` replaced by `point`.
    pub fn with_replaced(&self, slot: usize, point: &[f64]) -> Self {
        let mut out = self.clone();
        out.row_mut(slot).copy_from_slice(point);
        out
    }
}

/// Centers plus per-point nearest/second-nearest caches and per-cluster
/// aggregates.
///
/// For `k = 1` the runner-up is a sentinel: `assign2 = assign1` and
/// `dist2_sq = +∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringState {
    pub centers: Centers,
    pub assign1: Vec<usize>,
    pub assign2: Vec<usize>,
    pub dist1_sq: Vec<f64>,
    pub dist2_sq: Vec<f64>,
    /// `k × d` coordinate sums of the members of each cluster.
    pub cluster_sum: Vec<f64>,
    pub cluster_count: Vec<usize>,
    pub total_cost: f64,
}

impl ClusteringState {
    pub fn k(&self) -> usize {
        self.centers.k()
    }

    pub fn cluster_sum_row(&self, j: usize) -> &[f64] {
        let d = self.centers.dim();
        &self.cluster_sum[j * d..(j + 1) * d]
    }
}

/// Full `O(ndk)` pass computing nearest and runner-up centers for every point.
pub fn build_state(ds: &Dataset, centers: Centers) -> ClusteringState {
    let n = ds.n();
    let k = centers.k();
    let d = ds.dim();
    assert!(k >= 1, "at least one center required");
    assert_eq!(centers.dim(), d, "center dimension mismatch");

    let mut assign1 = vec![0usize; n];
    let mut assign2 = vec![0usize; n];
    let mut dist1_sq = vec![0.0; n];
    let mut dist2_sq = vec![0.0; n];
    let mut cluster_sum = vec![0.0; k * d];
    let mut cluster_count = vec![0usize; k];
    let mut total_cost = 0.0;

    for p in 0..n {
        let point = ds.point(p);
        let (mut b1, mut d1) = (0usize, sq_dist(point, centers.row(0)));
        let (mut b2, mut d2) = (0usize, f64::INFINITY);
        for j in 1..k {
            let dj = sq_dist(point, centers.row(j));
            // strict comparisons keep the smaller index on ties
            if dj < d1 {
                (b2, d2) = (b1, d1);
                (b1, d1) = (j, dj);
            } else if dj < d2 {
                (b2, d2) = (j, dj);
            }
        }
        if k == 1 {
            b2 = b1;
        }
        assign1[p] = b1;
        assign2[p] = b2;
        dist1_sq[p] = d1;
        dist2_sq[p] = d2;
        cluster_count[b1] += 1;
        for (s, x) in cluster_sum[b1 * d..(b1 + 1) * d].iter_mut().zip(point) {
            *s += x;
        }
        total_cost += d1;
    }

    ClusteringState {
        centers,
        assign1,
        assign2,
        dist1_sq,
        dist2_sq,
        cluster_sum,
        cluster_count,
        total_cost,
    }
}

/// `Φ(P, C)`: sum of squared distances to the nearest center.
pub fn cost(ds: &Dataset, centers: &Centers) -> f64 {
    ds.rows()
        .map(|p| {
            centers
                .rows()
                .map(|c| sq_dist(p, c))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// `Φ(P, C, φ')`: cost of the clustering under a fixed assignment.
///
/// Panics if an assignment entry is not a valid center index.
pub fn cost_with_assignment(ds: &Dataset, centers: &Centers, assignment: &[usize]) -> f64 {
    assert_eq!(assignment.len(), ds.n(), "assignment length mismatch");
    ds.rows()
        .zip(assignment)
        .map(|(p, &j)| {
            assert!(j < centers.k(), "assignment index {j} out of range");
            sq_dist(p, centers.row(j))
        })
        .sum()
}

/// Mean of the points assigned to cluster `j`, or `None` when it has no members.
pub fn centroid(ds: &Dataset, assignment: &[usize], j: usize) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; ds.dim()];
    let mut count = 0usize;
    for (p, &a) in ds.rows().zip(assignment) {
        if a == j {
            count += 1;
            for (s, x) in sum.iter_mut().zip(p) {
                *s += x;
            }
        }
    }
    (count > 0).then(|| sum.into_iter().map(|s| s / count as f64).collect())
}
