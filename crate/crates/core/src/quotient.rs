//! Metric quotients.
//!
//! The quotient distance between two classes is the length of the shortest
//! chain in which moves inside a class are free. On a finite space this is an
//! all-pairs shortest path problem on the complete graph with an extra
//! zero-weight edge between any two members of the same class.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp;
use crate::metric::{floyd_warshall, MetricSource, Point, PointedMetricSpace, PseudoMetric};

/// Above this many points the class-hub method replaces Floyd–Warshall.
pub const FLOYD_WARSHALL_LIMIT: usize = 512;

/// Equivalence relation on `0..n`, stored both ways.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl Partition {
    /// Validates that `classes` are nonempty, disjoint and cover `0..n`.
    /// Members are sorted; class order is kept.
    pub fn from_classes(n: usize, classes: Vec<Vec<usize>>) -> Result<Self> {
        let mut class_of = vec![usize::MAX; n];
        let mut sorted = Vec::with_capacity(classes.len());
        for (k, mut c) in classes.into_iter().enumerate() {
            if c.is_empty() {
                return Err(Error::InvalidPartition(format!("class {k} is empty")));
            }
            c.sort_unstable();
            for &x in &c {
                if x >= n {
                    return Err(Error::InvalidPartition(format!("point {x} out of range for {n} points")));
                }
                if class_of[x] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("point {x} belongs to two classes")));
                }
                class_of[x] = k;
            }
            sorted.push(c);
        }
        if let Some(x) = class_of.iter().position(|&k| k == usize::MAX) {
            return Err(Error::InvalidPartition(format!("point {x} is in no class")));
        }
        Ok(Self { class_of, classes: sorted })
    }

    /// Classes are numbered in order of first appearance of their label.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap = std::collections::HashMap::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut class_of = Vec::with_capacity(labels.len());
        for (x, &l) in labels.iter().enumerate() {
            let k = *remap.entry(l).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[k].push(x);
            class_of.push(k);
        }
        Self { class_of, classes }
    }

    pub fn singletons(n: usize) -> Self {
        Self { class_of: (0..n).collect(), classes: (0..n).map(|x| vec![x]).collect() }
    }

    pub fn whole(n: usize) -> Self {
        Self { class_of: vec![0; n], classes: vec![(0..n).collect()] }
    }

    /// `subset` as one class, every other point a singleton; classes ordered
    /// by smallest member.
    pub fn collapsing(n: usize, subset: &[usize]) -> Result<Self> {
        let mut labels: Vec<usize> = (0..n).collect();
        let Some(&first) = subset.iter().min() else {
            return Err(Error::Empty);
        };
        for &x in subset {
            if x >= n {
                return Err(Error::IndexOutOfRange { index: x, len: n });
            }
            labels[x] = first;
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn n_points(&self) -> usize {
        self.class_of.len()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.class_of
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApspMethod {
    /// Floyd–Warshall up to [`FLOYD_WARSHALL_LIMIT`] points, hubs above.
    #[default]
    Auto,
    FloydWarshall,
    /// Shortest chains routed through the nontrivial classes.
    Hub,
}

/// Quotient distance between every pair of points (row-major `n × n`).
pub fn quotient_point_distances(space: &PointedMetricSpace, partition: &Partition, method: ApspMethod) -> Vec<f64> {
    let n = space.len();
    assert_eq!(partition.n_points(), n, "partition size");
    let use_fw = match method {
        ApspMethod::Auto => n <= FLOYD_WARSHALL_LIMIT,
        ApspMethod::FloydWarshall => true,
        ApspMethod::Hub => false,
    };
    if use_fw {
        let mut dist: Vec<f64> = (0..n).flat_map(|i| space.row(i).to_vec()).collect();
        for c in partition.classes() {
            for &a in c {
                for &b in c {
                    dist[a * n + b] = 0.0;
                }
            }
        }
        floyd_warshall(&mut dist, n);
        dist
    } else {
        hub_distances(space, partition)
    }
}

/// A shortest chain either avoids teleports or enters a first class `h`,
/// crosses between classes, and leaves a last class `h'`. Jumps between two
/// teleports collapse to one by the triangle inequality, so
/// `d̃(x,y) = min(d(x,y), min_{h,h'} D(x,h) + W*(h,h') + D(h',y))` where `D` is
/// the point-to-class distance and `W*` the shortest path among classes.
fn hub_distances(space: &PointedMetricSpace, partition: &Partition) -> Vec<f64> {
    let n = space.len();
    let hubs: Vec<&Vec<usize>> = partition.classes().iter().filter(|c| c.len() > 1).collect();
    let h = hubs.len();
    let mut out: Vec<f64> = (0..n).flat_map(|i| space.row(i).to_vec()).collect();
    if h == 0 {
        return out;
    }
    // D[x][k]
    let d_to: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|x| {
            hubs.iter()
                .map(move |c| c.iter().map(|&a| space.d(x, a)).fold(f64::INFINITY, f64::min))
                .collect::<Vec<_>>()
        })
        .collect();
    let mut w = vec![f64::INFINITY; h * h];
    for k in 0..h {
        w[k * h + k] = 0.0;
        for l in k + 1..h {
            let m = hubs[l].iter().map(|&b| d_to[b * h + k]).fold(f64::INFINITY, f64::min);
            w[k * h + l] = m;
            w[l * h + k] = m;
        }
    }
    floyd_warshall(&mut w, h);
    // G[x][l] = min_k D[x][k] + W*[k][l]
    let g: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|x| {
            let dx = &d_to[x * h..(x + 1) * h];
            let w = &w;
            (0..h).map(move |l| (0..h).map(|k| dx[k] + w[k * h + l]).fold(f64::INFINITY, f64::min))
        })
        .collect();
    out.par_chunks_mut(n).enumerate().for_each(|(x, row)| {
        let gx = &g[x * h..(x + 1) * h];
        for (y, v) in row.iter_mut().enumerate() {
            let dy = &d_to[y * h..(y + 1) * h];
            let via = gx.iter().zip(dy).map(|(a, b)| a + b).fold(f64::INFINITY, f64::min);
            if via < *v {
                *v = via;
            }
        }
    });
    // the two association orders of the sums can differ in the last bit
    for x in 0..n {
        for y in x + 1..n {
            let m = out[x * n + y].min(out[y * n + x]);
            out[x * n + y] = m;
            out[y * n + x] = m;
        }
        out[x * n + x] = 0.0;
    }
    out
}

/// Quotient distances among the listed points only (row-major `q × q`),
/// by the class-hub method. Suited to large spaces where only a few points
/// are queried.
pub fn quotient_distances_among(space: &PointedMetricSpace, partition: &Partition, points: &[usize]) -> Vec<f64> {
    let q = points.len();
    let hubs: Vec<&Vec<usize>> = partition.classes().iter().filter(|c| c.len() > 1).collect();
    let h = hubs.len();
    let dist_to = |x: usize| -> Vec<f64> {
        hubs.iter().map(|c| c.iter().map(|&a| space.d(x, a)).fold(f64::INFINITY, f64::min)).collect()
    };
    let mut w = vec![f64::INFINITY; h * h];
    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|k| {
            (0..h)
                .map(|l| {
                    if k == l {
                        0.0
                    } else {
                        let mut m = f64::INFINITY;
                        for &a in hubs[k] {
                            for &b in hubs[l] {
                                m = m.min(space.d(a, b));
                            }
                        }
                        m
                    }
                })
                .collect()
        })
        .collect();
    for k in 0..h {
        w[k * h..(k + 1) * h].copy_from_slice(&rows[k]);
    }
    floyd_warshall(&mut w, h);
    let d_to: Vec<Vec<f64>> = points.par_iter().map(|&x| dist_to(x)).collect();
    let g: Vec<Vec<f64>> = d_to
        .par_iter()
        .map(|dx| (0..h).map(|l| (0..h).map(|k| dx[k] + w[k * h + l]).fold(f64::INFINITY, f64::min)).collect())
        .collect();
    let mut out = vec![0.0; q * q];
    out.par_chunks_mut(q.max(1)).enumerate().for_each(|(a, row)| {
        for (b, v) in row.iter_mut().enumerate() {
            let direct = space.d(points[a], points[b]);
            let via = g[a].iter().zip(&d_to[b]).map(|(p, r)| p + r).fold(f64::INFINITY, f64::min);
            *v = direct.min(via);
        }
    });
    for a in 0..q {
        for b in a + 1..q {
            let m = out[a * q + b].min(out[b * q + a]);
            out[a * q + b] = m;
            out[b * q + a] = m;
        }
        out[a * q + a] = 0.0;
    }
    out
}

/// Quotient pseudometric on the classes; the class of the base is the base.
pub fn quotient_pseudometric(space: &PointedMetricSpace, partition: &Partition) -> PseudoMetric {
    quotient_pseudometric_with(space, partition, ApspMethod::Auto)
}

pub fn quotient_pseudometric_with(space: &PointedMetricSpace, partition: &Partition, method: ApspMethod) -> PseudoMetric {
    let n = space.len();
    let pd = quotient_point_distances(space, partition, method);
    let reps: Vec<usize> = partition.classes().iter().map(|c| c[0]).collect();
    let k = reps.len();
    let mut dist = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            if a != b {
                dist[a * k + b] = pd[reps[a] * n + reps[b]];
            }
        }
    }
    let ids = reps.iter().map(|&r| space.points()[r].id.clone()).collect();
    PseudoMetric::with_ids(ids, partition.class_of(space.base()), dist)
}

/// Merges points at distance zero. Returns the metric space and, for every
/// input point, the index of its image.
pub fn metric_identification(pseudo: &PseudoMetric) -> (PointedMetricSpace, Vec<usize>) {
    let n = pseudo.len();
    let mut merge = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for x in 0..n {
        if merge[x] != usize::MAX {
            continue;
        }
        let g = reps.len();
        reps.push(x);
        for y in x..n {
            if merge[y] == usize::MAX && pseudo.d(x, y) == 0.0 {
                merge[y] = g;
            }
        }
    }
    let k = reps.len();
    let mut dist = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            if a != b {
                dist[a * k + b] = pseudo.d(reps[a], reps[b]);
            }
        }
    }
    let points = reps.iter().map(|&r| Point::new(pseudo.id(r))).collect();
    let space = PointedMetricSpace::from_flat_unchecked(
        String::from("quotient"),
        points,
        merge[pseudo.base()],
        dist,
        MetricSource::Matrix,
    );
    (space, merge)
}

/// Result of collapsing a subset to the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Collapse {
    pub space: PointedMetricSpace,
    /// Image of every original point in `space`.
    pub projection: Vec<usize>,
}

/// `M/F` with `d̃([x],[y]) = min{d(x,y), d(x,F) + d(y,F)}`; `F` becomes the base.
pub fn collapse_subset(space: &PointedMetricSpace, subset: &[usize]) -> Result<Collapse> {
    let n = space.len();
    if subset.is_empty() {
        return Err(Error::Empty);
    }
    if !subset.contains(&space.base()) {
        return Err(Error::BaseNotInSubset(space.base()));
    }
    let partition = Partition::collapsing(n, subset)?;
    let d_f: Vec<f64> = (0..n).map(|x| space.dist_to_set(x, subset)).collect();
    let reps: Vec<usize> = partition.classes().iter().map(|c| c[0]).collect();
    let fclass = partition.class_of(space.base());
    let k = reps.len();
    let mut dist = vec![0.0; k * k];
    for a in 0..k {
        for b in a + 1..k {
            let v = if a == fclass {
                d_f[reps[b]]
            } else if b == fclass {
                d_f[reps[a]]
            } else {
                space.d(reps[a], reps[b]).min(d_f[reps[a]] + d_f[reps[b]])
            };
            dist[a * k + b] = v;
            dist[b * k + a] = v;
        }
    }
    let ids = reps.iter().map(|&r| space.points()[r].id.clone()).collect();
    let pseudo = PseudoMetric::with_ids(ids, fclass, dist);
    let (mut q, merge) = metric_identification(&pseudo);
    q.set_name(format!("{}/F", space.name()));
    let projection = (0..n).map(|x| merge[partition.class_of(x)]).collect();
    Ok(Collapse { space: q, projection })
}

/// `max f(x) − f(y)` over 1-Lipschitz `f` constant on every class, by linear
/// programming over one value per class (the base class pinned to zero).
pub fn quotient_via_lip(space: &PointedMetricSpace, partition: &Partition, x: usize, y: usize) -> Result<f64> {
    let n = space.len();
    if partition.n_points() != n {
        return Err(Error::DimensionMismatch { expected: n, got: partition.n_points() });
    }
    if x >= n || y >= n {
        return Err(Error::IndexOutOfRange { index: x.max(y), len: n });
    }
    let (cx, cy) = (partition.class_of(x), partition.class_of(y));
    if cx == cy {
        return Ok(0.0);
    }
    let cb = partition.class_of(space.base());
    let var = |c: usize| if c < cb { Some(c) } else if c > cb { Some(c - 1) } else { None };
    let nv = partition.len() - 1;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for u in 0..n {
        for v in 0..n {
            let (cu, cv) = (partition.class_of(u), partition.class_of(v));
            if cu == cv {
                continue;
            }
            let mut row = vec![0.0; nv];
            if let Some(k) = var(cu) {
                row[k] += 1.0;
            }
            if let Some(k) = var(cv) {
                row[k] -= 1.0;
            }
            a.push(row);
            b.push(space.d(u, v));
        }
    }
    let mut c = vec![0.0; nv];
    if let Some(k) = var(cx) {
        c[k] += 1.0;
    }
    if let Some(k) = var(cy) {
        c[k] -= 1.0;
    }
    Ok(lp::maximize(&c, &a, &b)?.value)
}

/// Partition of a sampled segments space that identifies all branch
/// endpoints `e_j` and collapses each `F_j = [1/4 + 2^-(2+j), 3/4 − 2^-(2+j)] e_j`
/// (branches numbered from 1). Reads the sample coordinates.
pub fn segments_partition(space: &PointedMetricSpace) -> Result<Partition> {
    let n = space.len();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut tips = None;
    let mut inner: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for (x, p) in space.points().iter().enumerate() {
        let c = p.coords.as_ref().ok_or_else(|| Error::InvalidParameter("segments space needs coordinates".into()))?;
        let Some(j) = c.iter().position(|&v| v != 0.0) else { continue };
        let t = c[j];
        let k = (j + 3) as i32;
        let (lo, hi) = (0.25 + crate::numeric::pow2(-k), 0.75 - crate::numeric::pow2(-k));
        if t == 1.0 {
            labels[x] = *tips.get_or_insert(x);
        } else if t >= lo && t <= hi {
            labels[x] = *inner.entry(j).or_insert(x);
        }
    }
    Ok(Partition::from_labels(&labels))
}

/// Segments space with `branches` branches sampled exactly at the points the
/// quotient distance depends on: `1/4, 1/2, 3/4, 1` and the ends of `F_j`.
pub fn segments_counterexample(branches: usize) -> Result<(PointedMetricSpace, Partition)> {
    let positions: Vec<Vec<f64>> = (1..=branches)
        .map(|j| {
            let e = crate::numeric::pow2(-(j as i32 + 2));
            vec![0.25, 0.25 + e, 0.5, 0.75 - e, 0.75, 1.0]
        })
        .collect();
    let space = crate::metric::segments_space_at(&positions)?;
    let partition = segments_partition(&space)?;
    Ok((space, partition))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vee() -> PointedMetricSpace {
        PointedMetricSpace::from_rows(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 2.0], vec![1.0, 2.0, 0.0]], 0).unwrap()
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::from_classes(3, vec![vec![0, 1], vec![2]]).is_ok());
        assert!(Partition::from_classes(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::from_classes(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::from_classes(3, vec![vec![0, 1, 2], vec![]]).is_err());
        let p = Partition::from_labels(&[5, 3, 5]);
        assert_eq!(p.classes(), &[vec![0, 2], vec![1]]);
    }

    #[test]
    fn collapse_examples() {
        let s = vee();
        let c = collapse_subset(&s, &[0, 1]).unwrap();
        assert_eq!(c.space.len(), 2);
        assert_eq!(c.projection, vec![0, 0, 1]);
        assert_eq!(c.space.d(c.projection[2], c.space.base()), 1.0);
        let same = collapse_subset(&s, &[0]).unwrap();
        assert_eq!(same.space.to_rows(), s.to_rows());
        assert_eq!(collapse_subset(&s, &[1]).unwrap_err(), Error::BaseNotInSubset(0));
    }

    #[test]
    fn trivial_partitions() {
        let s = vee();
        assert_eq!(quotient_pseudometric(&s, &Partition::singletons(3)).to_rows(), s.to_rows());
        let whole = quotient_pseudometric(&s, &Partition::whole(3));
        assert_eq!(whole.len(), 1);
        let pd = quotient_point_distances(&s, &Partition::whole(3), ApspMethod::Auto);
        assert!(pd.iter().all(|&v| v == 0.0));
        assert_eq!(quotient_via_lip(&s, &Partition::whole(3), 1, 2).unwrap(), 0.0);
        assert!((quotient_via_lip(&s, &Partition::singletons(3), 1, 2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identification_merges_zero_pairs() {
        let p = PseudoMetric::from_flat(3, 0, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        let (m, merge) = metric_identification(&p);
        assert_eq!(merge, vec![0, 0, 1]);
        assert_eq!(m.len(), 2);
        assert!(m.validate().is_valid());
        let metric = PseudoMetric::from_space(&vee());
        assert_eq!(metric_identification(&metric).0.to_rows(), vee().to_rows());
    }
}
