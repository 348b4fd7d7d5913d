//! Random instances for the experiment suites and property tests.

use crate::free_norm::FreeVector;
use crate::metric::{Point, PointedMetricSpace};
use crate::rng::Rng;

/// Random cloud of `n` points in `[-1, 1]^dim` under an ℓ_p norm chosen from
/// {1, 2, ∞}, base at index 0. Points closer than 1e-3 are resampled.
pub fn random_cloud(rng: &mut Rng, n: usize, dim: usize) -> PointedMetricSpace {
    let p = [1.0, 2.0, f64::INFINITY][rng.below(3)];
    random_cloud_lp(rng, n, dim, p, 1.0)
}

pub fn random_cloud_lp(rng: &mut Rng, n: usize, dim: usize, p: f64, half_width: f64) -> PointedMetricSpace {
    let mut coords: Vec<Vec<f64>> = Vec::with_capacity(n);
    while coords.len() < n {
        let c: Vec<f64> = (0..dim).map(|_| rng.range(-half_width, half_width)).collect();
        let far = coords
            .iter()
            .all(|q| q.iter().zip(&c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) > 1e-3 * half_width);
        if far {
            coords.push(c);
        }
    }
    PointedMetricSpace::from_point_cloud(coords, p, 0).expect("distinct points")
}

/// Connected random graph: a random spanning tree plus extra edges, with
/// dyadic weights in {1/4, 1/2, ..., 4} so shortest paths are exact.
pub fn random_graph(rng: &mut Rng, n: usize, extra_edges: usize) -> PointedMetricSpace {
    let weight = |rng: &mut Rng| f64::powi(2.0, rng.int_between(-2, 2) as i32) * rng.int_between(1, 3) as f64;
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.below(v);
        edges.push((u, v, weight(rng)));
    }
    for _ in 0..extra_edges {
        let u = rng.below(n);
        let v = rng.below(n);
        if u != v {
            edges.push((u, v, weight(rng)));
        }
    }
    PointedMetricSpace::from_graph(n, &edges, 0).expect("connected")
}

/// Either a point cloud or a graph metric, `n` points.
pub fn random_space(rng: &mut Rng, n: usize) -> PointedMetricSpace {
    if rng.bernoulli(0.5) {
        let dim = 1 + rng.below(3);
        random_cloud(rng, n, dim)
    } else {
        let extra = rng.below(n + 1);
        random_graph(rng, n, extra)
    }
}

/// Random vector with coefficients in `[-1, 1]` on `support_size` random points.
pub fn random_free_vector(rng: &mut Rng, n: usize, support_size: usize) -> FreeVector {
    let support = rng.sample_indices(n, support_size);
    FreeVector::from_pairs(support.into_iter().map(|x| (x, rng.range(-1.0, 1.0))))
}

/// Random subset of `0..n` containing `base`, of size `k` (at least 1).
pub fn random_subset_with(rng: &mut Rng, n: usize, k: usize, base: usize) -> Vec<usize> {
    let mut others: Vec<usize> = (0..n).filter(|&x| x != base).collect();
    rng.shuffle(&mut others);
    others.truncate(k.saturating_sub(1));
    others.push(base);
    others.sort_unstable();
    others
}

/// Random partition of `0..n` into at most `max_classes` classes (labels).
pub fn random_labels(rng: &mut Rng, n: usize, max_classes: usize) -> Vec<usize> {
    (0..n).map(|_| rng.below(max_classes.max(1))).collect()
}

/// 1-Lipschitz function vanishing at the base: `min_i (v_i + d(x, p_i))`
/// shifted so that the base value is zero.
pub fn random_lip1(rng: &mut Rng, space: &PointedMetricSpace, anchors: usize) -> Vec<f64> {
    let n = space.len();
    let picks: Vec<(usize, f64)> = (0..anchors.max(1))
        .map(|_| (rng.below(n), rng.range(-1.0, 1.0) * space.max_distance()))
        .collect();
    let raw: Vec<f64> = (0..n)
        .map(|x| picks.iter().map(|&(p, v)| v + space.d(x, p)).fold(f64::INFINITY, f64::min))
        .collect();
    let b = raw[space.base()];
    raw.into_iter().map(|v| v - b).collect()
}

/// Point cloud with explicit ids, convenient for tests.
pub fn cloud_with_ids(coords: &[(&str, Vec<f64>)], p: f64, base: usize) -> PointedMetricSpace {
    let pts = coords.iter().map(|(id, c)| Point::with_coords(*id, c.clone())).collect();
    PointedMetricSpace::from_points_lp(pts, p, base).expect("valid cloud")
}
