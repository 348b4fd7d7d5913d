//! Finite pointed metric spaces: validation, generators and the elementary
//! operations (rescaling, restriction, annuli) the rest of the crate builds on.

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::pow2;

/// Relative slack used when checking generated matrices for the metric axioms.
pub const METRIC_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub id: String,
    pub coords: Option<Vec<f64>>,
}

impl Point {
    pub fn new(id: impl Into<String>) -> Self {
        Self { id: id.into(), coords: None }
    }

    pub fn with_coords(id: impl Into<String>, coords: Vec<f64>) -> Self {
        Self { id: id.into(), coords: Some(coords) }
    }
}

/// How a space's distances were produced. Kept so that a space loaded from a
/// file is written back in the same form.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSource {
    Matrix,
    /// ℓ_p distances between point coordinates (`p = f64::INFINITY` allowed).
    Lp { p: f64 },
    /// Shortest-path distances of a weighted undirected graph.
    Graph { edges: Vec<(usize, usize, f64)> },
}

/// A finite metric space with a distinguished base point.
///
/// Point indices are canonical; coordinates are metadata and are never read
/// once the distance matrix exists.
#[derive(Debug, Clone, PartialEq)]
pub struct PointedMetricSpace {
    name: String,
    points: Vec<Point>,
    base: usize,
    dist: Vec<f64>,
    source: MetricSource,
}

/// Symmetric matrix with zero diagonal satisfying the triangle inequality, in
/// which distinct points may be at distance zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoMetric {
    n: usize,
    base: usize,
    ids: Vec<String>,
    dist: Vec<f64>,
}

impl PseudoMetric {
    pub fn from_flat(n: usize, base: usize, dist: Vec<f64>) -> Self {
        Self::with_ids((0..n).map(|i| i.to_string()).collect(), base, dist)
    }

    pub fn with_ids(ids: Vec<String>, base: usize, dist: Vec<f64>) -> Self {
        let n = ids.len();
        assert_eq!(dist.len(), n * n);
        Self { n, base, ids, dist }
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn base(&self) -> usize {
        self.base
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotSquare { row: usize, len: usize, expected: usize },
    NonFinite { i: usize, j: usize, value: f64 },
    Negative { i: usize, j: usize, value: f64 },
    NonZeroDiagonal { i: usize, value: f64 },
    Asymmetric { i: usize, j: usize, dij: f64, dji: f64 },
    /// Distinct points at distance zero (only reported in strict mode).
    ZeroDistance { i: usize, j: usize },
    /// `d(i, j) > d(i, via) + d(via, j)`.
    Triangle { i: usize, j: usize, via: usize, direct: f64, detour: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSquare { row, len, expected } => {
                write!(f, "row {row} has {len} entries, expected {expected}")
            }
            Violation::NonFinite { i, j, value } => write!(f, "non-finite entry d({i},{j})={value}"),
            Violation::Negative { i, j, value } => write!(f, "negative entry d({i},{j})={value}"),
            Violation::NonZeroDiagonal { i, value } => write!(f, "nonzero diagonal d({i},{i})={value}"),
            Violation::Asymmetric { i, j, dij, dji } => {
                write!(f, "asymmetric: d({i},{j})={dij} but d({j},{i})={dji}")
            }
            Violation::ZeroDistance { i, j } => write!(f, "pseudometric: d({i},{j})=0"),
            Violation::Triangle { i, j, via, direct, detour } => write!(
                f,
                "triangle violation at ({i},{j},{via}): d({i},{j})={direct} > d({i},{via})+d({via},{j})={detour}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every metric axiom and reports each violation with its witness.
///
/// Triangle inequalities are tested with slack `METRIC_SLACK * max entry` so
/// that matrices produced by floating-point generators are accepted.
/// In strict mode distinct points at distance zero are rejected.
pub fn validate_metric(matrix: &[Vec<f64>], strict: bool) -> ValidationReport {
    let n = matrix.len();
    let mut report = ValidationReport::default();
    for (row, r) in matrix.iter().enumerate() {
        if r.len() != n {
            report.violations.push(Violation::NotSquare { row, len: r.len(), expected: n });
        }
    }
    if !report.is_valid() {
        return report;
    }
    let mut scale = 0.0f64;
    let mut finite = true;
    for i in 0..n {
        for j in 0..n {
            let v = matrix[i][j];
            if !v.is_finite() {
                report.violations.push(Violation::NonFinite { i, j, value: v });
                finite = false;
                continue;
            }
            scale = scale.max(v.abs());
            if v < 0.0 {
                report.violations.push(Violation::Negative { i, j, value: v });
            }
        }
    }
    for i in 0..n {
        if matrix[i][i] != 0.0 && matrix[i][i].is_finite() {
            report.violations.push(Violation::NonZeroDiagonal { i, value: matrix[i][i] });
        }
        for j in i + 1..n {
            let (a, b) = (matrix[i][j], matrix[j][i]);
            if a.is_finite() && b.is_finite() && a != b {
                report.violations.push(Violation::Asymmetric { i, j, dij: a, dji: b });
            }
            if strict && a == 0.0 {
                report.violations.push(Violation::ZeroDistance { i, j });
            }
        }
    }
    if !finite {
        return report;
    }
    let slack = METRIC_SLACK * scale;
    for i in 0..n {
        for j in i + 1..n {
            let direct = matrix[i][j];
            for via in 0..n {
                if via == i || via == j {
                    continue;
                }
                let detour = matrix[i][via] + matrix[via][j];
                if direct > detour + slack {
                    report.violations.push(Violation::Triangle { i, j, via, direct, detour });
                }
            }
        }
    }
    report
}

/// Which point of a restricted subset becomes the new base point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasePolicy {
    /// Keep the original base; it must belong to the subset.
    Keep,
    /// Keep the original base if present, otherwise use the subset point
    /// nearest to it (lowest index on ties).
    Nearest,
    /// Use the given original index as the base.
    Explicit(usize),
}

fn lp_distance(a: &[f64], b: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    } else if p == 1.0 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    } else if p == 2.0 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    } else {
        a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// ℓ_p norm of a vector (`p = f64::INFINITY` allowed).
pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    let zero = vec![0.0; v.len()];
    lp_distance(v, &zero, p)
}

impl PointedMetricSpace {
    /// Builds a space from an explicit matrix, rejecting anything that is not
    /// a metric (pseudometrics included).
    pub fn from_matrix(points: Vec<Point>, matrix: &[Vec<f64>], base: usize) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if points.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: points.len() });
        }
        if base >= n {
            return Err(Error::IndexOutOfRange { index: base, len: n });
        }
        let report = validate_metric(matrix, true);
        if !report.is_valid() {
            return Err(Error::InvalidMetric(report.violations[0].to_string()));
        }
        Ok(Self {
            name: String::from("matrix"),
            points,
            base,
            dist: matrix.iter().flatten().copied().collect(),
            source: MetricSource::Matrix,
        })
    }

    /// Matrix constructor with default point ids `"0"`, `"1"`, ...
    pub fn from_rows(matrix: &[Vec<f64>], base: usize) -> Result<Self> {
        let points = (0..matrix.len()).map(|i| Point::new(i.to_string())).collect();
        Self::from_matrix(points, matrix, base)
    }

    /// Internal constructor for matrices already known to be metrics.
    pub(crate) fn from_flat_unchecked(
        name: String,
        points: Vec<Point>,
        base: usize,
        dist: Vec<f64>,
        source: MetricSource,
    ) -> Self {
        debug_assert_eq!(dist.len(), points.len() * points.len());
        Self { name, points, base, dist, source }
    }

    /// Pairwise ℓ_p distances between the given coordinate vectors.
    pub fn from_point_cloud(coords: Vec<Vec<f64>>, p: f64, base: usize) -> Result<Self> {
        let points = coords
            .into_iter()
            .enumerate()
            .map(|(i, c)| Point::with_coords(i.to_string(), c))
            .collect();
        Self::from_points_lp(points, p, base)
    }

    /// Like [`Self::from_point_cloud`] but keeps caller-supplied ids.
    pub fn from_points_lp(points: Vec<Point>, p: f64, base: usize) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::BadExponent(p));
        }
        let n = points.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if base >= n {
            return Err(Error::IndexOutOfRange { index: base, len: n });
        }
        let mut coords = Vec::with_capacity(n);
        for pt in &points {
            match &pt.coords {
                Some(c) => coords.push(c.as_slice()),
                None => return Err(Error::InvalidParameter(format!("point {} has no coordinates", pt.id))),
            }
        }
        let dim = coords[0].len();
        for c in &coords {
            if c.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: c.len() });
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("non-finite coordinate".into()));
            }
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = lp_distance(coords[i], coords[j], p);
                if d == 0.0 {
                    return Err(Error::DuplicatePoints(i, j));
                }
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(Self { name: format!("l{p}-cloud"), points, base, dist, source: MetricSource::Lp { p } })
    }

    /// Shortest-path metric of a connected graph with positive edge weights.
    pub fn from_graph(n: usize, edges: &[(usize, usize, f64)], base: usize) -> Result<Self> {
        let points = (0..n).map(|i| Point::new(i.to_string())).collect();
        Self::from_graph_with_points(points, edges, base)
    }

    pub fn from_graph_with_points(points: Vec<Point>, edges: &[(usize, usize, f64)], base: usize) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if base >= n {
            return Err(Error::IndexOutOfRange { index: base, len: n });
        }
        let mut dist = vec![f64::INFINITY; n * n];
        for i in 0..n {
            dist[i * n + i] = 0.0;
        }
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
            }
            if !(w > 0.0 && w.is_finite()) || i == j {
                return Err(Error::BadEdge(i, j, w));
            }
            if w < dist[i * n + j] {
                dist[i * n + j] = w;
                dist[j * n + i] = w;
            }
        }
        floyd_warshall(&mut dist, n);
        if let Some(j) = (0..n).find(|&j| dist[j].is_infinite()) {
            return Err(Error::Disconnected(j));
        }
        Ok(Self {
            name: String::from("graph"),
            points,
            base,
            dist,
            source: MetricSource::Graph { edges: edges.to_vec() },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn source(&self) -> &MetricSource {
        &self.source
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.points.len() + j]
    }

    /// Distance to the base point.
    #[inline]
    pub fn radius(&self, i: usize) -> f64 {
        self.d(i, self.base)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.points.len();
        &self.dist[i * n..(i + 1) * n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.points.iter().position(|p| p.id == id)
    }

    /// Distance from `x` to the nearest point of `set` (infinite for an empty set).
    pub fn dist_to_set(&self, x: usize, set: &[usize]) -> f64 {
        set.iter().map(|&y| self.d(x, y)).fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> ValidationReport {
        validate_metric(&self.to_rows(), true)
    }

    /// Multiplies every distance by `lambda > 0`.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::BadScale(lambda));
        }
        let mut out = self.clone();
        for d in &mut out.dist {
            *d *= lambda;
        }
        for pt in &mut out.points {
            if let Some(c) = &mut pt.coords {
                for x in c.iter_mut() {
                    *x *= lambda;
                }
            }
        }
        // Distances recomputed from scaled coordinates or edges could differ
        // in the last bit, so the scaled matrix itself becomes the source.
        out.source = MetricSource::Matrix;
        Ok(out)
    }

    /// Induced metric on `subset` (sorted, deduplicated). Returns the new space
    /// and the original index of each of its points.
    pub fn restrict(&self, subset: &[usize], policy: BasePolicy) -> Result<(Self, Vec<usize>)> {
        let mut idx: Vec<usize> = subset.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if idx.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.len()) {
            return Err(Error::IndexOutOfRange { index: bad, len: self.len() });
        }
        let base_orig = match policy {
            BasePolicy::Keep => {
                if idx.binary_search(&self.base).is_err() {
                    return Err(Error::BaseNotInSubset(self.base));
                }
                self.base
            }
            BasePolicy::Nearest => {
                if idx.binary_search(&self.base).is_ok() {
                    self.base
                } else {
                    let mut best = idx[0];
                    for &i in &idx {
                        if self.radius(i) < self.radius(best) {
                            best = i;
                        }
                    }
                    best
                }
            }
            BasePolicy::Explicit(b) => {
                if idx.binary_search(&b).is_err() {
                    return Err(Error::BaseNotInSubset(b));
                }
                b
            }
        };
        let m = idx.len();
        let mut dist = vec![0.0; m * m];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                dist[a * m + b] = self.d(i, j);
            }
        }
        let base = idx.binary_search(&base_orig).expect("base in subset");
        let points = idx.iter().map(|&i| self.points[i].clone()).collect();
        let source = match &self.source {
            MetricSource::Lp { p } => MetricSource::Lp { p: *p },
            _ => MetricSource::Matrix,
        };
        Ok((Self { name: format!("{}|sub", self.name), points, base, dist, source }, idx))
    }

    /// Same space with a different base point.
    pub fn with_base(&self, base: usize) -> Result<Self> {
        if base >= self.len() {
            return Err(Error::IndexOutOfRange { index: base, len: self.len() });
        }
        let mut out = self.clone();
        out.base = base;
        Ok(out)
    }

    /// Indices `x` with `2^inner_exp < d(x, 0) <= 2^outer_exp` (closed balls, so
    /// the inner radius is excluded and the outer one included).
    pub fn annulus_between(&self, inner_exp: i32, outer_exp: i32) -> Vec<usize> {
        let (lo, hi) = (pow2(inner_exp), pow2(outer_exp));
        (0..self.len())
            .filter(|&x| {
                let r = self.radius(x);
                r > lo && r <= hi
            })
            .collect()
    }

    /// The annulus `B_{2^{k+1}} \ B_{2^{k-inner_offset}}`; `inner_offset = 1`
    /// gives the support annulus of the k-th dyadic cut-off operator.
    pub fn annulus(&self, k: i32, inner_offset: i32) -> Vec<usize> {
        self.annulus_between(k - inner_offset, k + 1)
    }
}

impl PseudoMetric {
    pub fn from_space(space: &PointedMetricSpace) -> Self {
        Self {
            n: space.len(),
            base: space.base(),
            ids: space.points.iter().map(|p| p.id.clone()).collect(),
            dist: space.dist.clone(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_metric(&self.to_rows(), false)
    }
}

pub(crate) fn floyd_warshall(dist: &mut [f64], n: usize) {
    for k in 0..n {
        for i in 0..n {
            let dik = dist[i * n + k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = dik + dist[k * n + j];
                if via < dist[i * n + j] {
                    dist[i * n + j] = via;
                }
            }
        }
    }
}

/// Samples `Cusp = {(x,0)} ∪ {(x,x^2)}` at `n` equally spaced abscissae in
/// `[0, xmax]` per branch, euclidean metric, base `(0,0)`. The shared origin
/// appears once, giving `2n - 1` points.
pub fn cusp_space(n: usize, xmax: f64) -> Result<PointedMetricSpace> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("cusp needs n >= 2 samples, got {n}")));
    }
    if !(xmax > 0.0 && xmax.is_finite()) {
        return Err(Error::InvalidParameter(format!("xmax must be positive, got {xmax}")));
    }
    let mut points = vec![Point::with_coords("0", vec![0.0, 0.0])];
    let step = |i: usize| xmax * i as f64 / (n - 1) as f64;
    for i in 1..n {
        points.push(Point::with_coords(format!("a{i}"), vec![step(i), 0.0]));
    }
    for i in 1..n {
        let x = step(i);
        points.push(Point::with_coords(format!("b{i}"), vec![x, x * x]));
    }
    let mut space = PointedMetricSpace::from_points_lp(points, 2.0, 0)?;
    space.name = format!("cusp-{n}-{xmax}");
    Ok(space)
}

/// Truncation of the union of segments `[0,1]e_j`, `j = 1..J`, in ℓ_1, each
/// branch sampled at `m` equally spaced points (origin shared).
pub fn segments_space(branches: usize, m: usize) -> Result<PointedMetricSpace> {
    if branches == 0 || m < 2 {
        return Err(Error::InvalidParameter(format!(
            "segments space needs J >= 1 and m >= 2, got J={branches}, m={m}"
        )));
    }
    let grid: Vec<f64> = (1..m).map(|k| k as f64 / (m - 1) as f64).collect();
    let positions = vec![grid; branches];
    let mut space = segments_space_at(&positions)?;
    space.name = format!("segments-{branches}-{m}");
    Ok(space)
}

/// Segments space with explicit sample positions `t` in `(0, 1]` on each
/// branch; the origin is point 0 and the base. Point ids are `"0"` and
/// `"j:t"`; points are ordered branch by branch in increasing `t`.
pub fn segments_space_at(positions: &[Vec<f64>]) -> Result<PointedMetricSpace> {
    let branches = positions.len();
    if branches == 0 {
        return Err(Error::InvalidParameter("segments space needs at least one branch".into()));
    }
    let mut samples: Vec<(usize, f64)> = Vec::new();
    for (j, ts) in positions.iter().enumerate() {
        let mut ts = ts.clone();
        if ts.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err(Error::InvalidParameter(format!("branch {j}: positions must lie in (0, 1]")));
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        samples.extend(ts.into_iter().map(|t| (j, t)));
    }
    let n = samples.len() + 1;
    let mut points = vec![Point::with_coords("0", vec![0.0; branches])];
    for &(j, t) in &samples {
        let mut c = vec![0.0; branches];
        c[j] = t;
        points.push(Point::with_coords(format!("{}:{}", j + 1, t), c));
    }
    let mut dist = vec![0.0; n * n];
    for a in 0..samples.len() {
        let (ja, ta) = samples[a];
        dist[(a + 1) * n] = ta;
        dist[a + 1] = ta;
        for b in a + 1..samples.len() {
            let (jb, tb) = samples[b];
            let d = if ja == jb { (ta - tb).abs() } else { ta + tb };
            dist[(a + 1) * n + b + 1] = d;
            dist[(b + 1) * n + a + 1] = d;
        }
    }
    Ok(PointedMetricSpace::from_flat_unchecked(
        format!("segments-{branches}"),
        points,
        0,
        dist,
        MetricSource::Matrix,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_matrix_is_valid() {
        assert!(validate_metric(&[vec![0.0, 1.0], vec![1.0, 0.0]], true).is_valid());
    }

    #[test]
    fn triangle_violation_reports_witness() {
        let m = vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]];
        let r = validate_metric(&m, false);
        assert_eq!(r.violations.len(), 1);
        assert!(matches!(r.violations[0], Violation::Triangle { i: 0, j: 2, via: 1, .. }));
    }

    #[test]
    fn strict_rejects_pseudometric() {
        let r = validate_metric(&[vec![0.0, 0.0], vec![0.0, 0.0]], true);
        assert_eq!(r.to_string(), "pseudometric: d(0,1)=0");
        assert!(validate_metric(&[vec![0.0, 0.0], vec![0.0, 0.0]], false).is_valid());
    }

    #[test]
    fn nan_and_shape_rejected() {
        assert!(!validate_metric(&[vec![0.0, f64::NAN], vec![f64::NAN, 0.0]], false).is_valid());
        assert!(!validate_metric(&[vec![0.0, 1.0], vec![1.0]], false).is_valid());
        assert!(!validate_metric(&[vec![0.0, -1.0], vec![-1.0, 0.0]], false).is_valid());
        assert!(!validate_metric(&[vec![0.0, 1.0], vec![2.0, 0.0]], false).is_valid());
    }

    #[test]
    fn point_cloud_norms() {
        let c = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let e = PointedMetricSpace::from_point_cloud(c.clone(), 2.0, 0).unwrap();
        assert_eq!(e.d(1, 2), 2f64.sqrt());
        let l1 = PointedMetricSpace::from_point_cloud(c.clone(), 1.0, 0).unwrap();
        assert_eq!(l1.d(1, 2), 2.0);
        let linf = PointedMetricSpace::from_point_cloud(c.clone(), f64::INFINITY, 0).unwrap();
        assert_eq!(linf.d(1, 2), 1.0);
        assert_eq!(
            PointedMetricSpace::from_point_cloud(vec![vec![1.0], vec![1.0]], 2.0, 0),
            Err(Error::DuplicatePoints(0, 1))
        );
        assert_eq!(PointedMetricSpace::from_point_cloud(c, 0.5, 0), Err(Error::BadExponent(0.5)));
    }

    #[test]
    fn graph_metrics() {
        let path = PointedMetricSpace::from_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)], 0).unwrap();
        assert_eq!(path.d(0, 2), 2.0);
        let tri = PointedMetricSpace::from_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)], 0).unwrap();
        assert_eq!(tri.d(0, 2), 2.0);
        let k = 5;
        let star: Vec<_> = (1..=k).map(|i| (0, i, 1.0)).collect();
        let s = PointedMetricSpace::from_graph(k + 1, &star, 0).unwrap();
        for i in 1..=k {
            for j in i + 1..=k {
                assert_eq!(s.d(i, j), 2.0);
            }
        }
        assert_eq!(PointedMetricSpace::from_graph(3, &[(0, 1, 1.0)], 0), Err(Error::Disconnected(2)));
    }

    #[test]
    fn scaling() {
        let s = PointedMetricSpace::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], 0).unwrap();
        assert_eq!(s.scale(1.0).unwrap().to_rows(), s.to_rows());
        assert_eq!(s.scale(2.0).unwrap().d(0, 1), 2.0);
        assert!(s.scale(0.0).is_err());
        assert!(s.scale(-1.0).is_err());
    }

    #[test]
    fn restriction() {
        let s = PointedMetricSpace::from_graph(3, &[(0, 1, 1.0), (1, 2, 2.0)], 0).unwrap();
        let (full, idx) = s.restrict(&[2, 1, 0], BasePolicy::Keep).unwrap();
        assert_eq!(full.to_rows(), s.to_rows());
        assert_eq!(idx, vec![0, 1, 2]);
        let (two, _) = s.restrict(&[0, 2], BasePolicy::Keep).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two.d(0, 1), 3.0);
        assert_eq!(s.restrict(&[], BasePolicy::Keep).unwrap_err(), Error::Empty);
        assert_eq!(s.restrict(&[1, 2], BasePolicy::Explicit(0)).unwrap_err(), Error::BaseNotInSubset(0));
        let (sub, idx) = s.restrict(&[1, 2], BasePolicy::Explicit(2)).unwrap();
        assert_eq!(idx[sub.base()], 2);
        let (near, idx) = s.restrict(&[1, 2], BasePolicy::Nearest).unwrap();
        assert_eq!(idx[near.base()], 1);
    }

    #[test]
    fn annulus_membership() {
        let s = PointedMetricSpace::from_point_cloud(vec![vec![0.0], vec![0.4], vec![1.0], vec![3.0]], 2.0, 0).unwrap();
        assert_eq!(s.annulus(1, 1), vec![3]);
        assert_eq!(s.annulus(0, 1), vec![2]);
        assert!(s.annulus(40, 1).is_empty());
        // radius 1 = 2^{k-1} excluded for k = 1; radius 4 = 2^{k+1} included
        let t = PointedMetricSpace::from_point_cloud(vec![vec![0.0], vec![1.0], vec![4.0]], 2.0, 0).unwrap();
        assert_eq!(t.annulus(1, 1), vec![2]);
    }

    #[test]
    fn cusp_fixture() {
        let c = cusp_space(2, 1.0).unwrap();
        assert_eq!(c.len(), 3);
        let coords: Vec<_> = c.points().iter().map(|p| p.coords.clone().unwrap()).collect();
        assert_eq!(coords, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(c.d(1, 2), 1.0);
        assert_eq!(cusp_space(5, 2.0).unwrap().len(), 9);
        assert!(cusp_space(1, 1.0).is_err());
        assert!(cusp_space(3, 0.0).is_err());
    }

    #[test]
    fn segments_fixture() {
        let s = segments_space(2, 2).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.d(1, 2), 2.0);
        let t = segments_space(2, 5).unwrap();
        assert_eq!(t.len(), 9);
        let a = t.index_of("1:0.5").unwrap();
        let b = t.index_of("2:0.25").unwrap();
        let c = t.index_of("1:0.25").unwrap();
        assert_eq!(t.d(a, b), 0.75);
        assert_eq!(t.d(a, c), 0.25);
        assert!(t.validate().is_valid());
    }
}
