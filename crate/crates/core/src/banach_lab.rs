//! Radial nets of finite-dimensional normed spaces, the crown-squeezing maps
//! `L` and `R`, and the split of a Lipschitz function into a part constant on
//! `∼_L` classes plus a part constant on `∼_R` classes.
//!
//! Radii are handled by their nominal grid values so that comparisons with
//! crown boundaries `2^m` and `1.5·2^m` are exact.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free_norm::lip_norm;
use crate::lp;
use crate::metric::{lp_norm, Point, PointedMetricSpace};
use crate::numeric::{crown_index, floor_log2, is_power_of_two, pow2};
use crate::quotient::{quotient_distances_among, Partition};
use crate::rng::Rng;

const RADIUS_TOL: f64 = 1e-12;

/// Directions times radii, plus the origin as base (index 0). The point at
/// direction `d` and radius index `j` has index `1 + d·R + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialNet {
    p: f64,
    directions: Vec<Vec<f64>>,
    radii: Vec<f64>,
    space: PointedMetricSpace,
}

impl RadialNet {
    /// Directions are rescaled to unit ℓ_p norm; radii must be positive and
    /// strictly increasing.
    pub fn new(directions: Vec<Vec<f64>>, radii: Vec<f64>, p: f64) -> Result<Self> {
        if directions.is_empty() || radii.is_empty() {
            return Err(Error::Empty);
        }
        if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) || radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::RadialNet("radii must be positive and strictly increasing".into()));
        }
        let dim = directions[0].len();
        if dim == 0 {
            return Err(Error::RadialNet("zero-dimensional directions".into()));
        }
        let mut units = Vec::with_capacity(directions.len());
        for u in directions {
            if u.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: u.len() });
            }
            let norm = lp_norm(&u, p);
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::RadialNet("direction must be a nonzero finite vector".into()));
            }
            units.push(u.into_iter().map(|c| c / norm).collect::<Vec<f64>>());
        }
        let mut points = vec![Point::with_coords("0", vec![0.0; dim])];
        for (d, u) in units.iter().enumerate() {
            for (j, &r) in radii.iter().enumerate() {
                let coords: Vec<f64> = u.iter().map(|c| r * c).collect();
                if (lp_norm(&coords, p) - r).abs() > RADIUS_TOL * r {
                    return Err(Error::RadialNet(format!("point d{d}:r{j} has norm off its radius")));
                }
                points.push(Point::with_coords(format!("d{d}:r{j}"), coords));
            }
        }
        let mut space = PointedMetricSpace::from_points_lp(points, p, 0)?;
        space.set_name(format!("radial-net-{}x{}", units.len(), radii.len()));
        Ok(Self { p, directions: units, radii, space })
    }

    /// `n` equally spaced directions in the plane.
    pub fn planar(n: usize, radii: Vec<f64>, p: f64) -> Result<Self> {
        let dirs = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        Self::new(dirs, radii, p)
    }

    /// Same directions and norm, different radii.
    pub fn with_radii(&self, radii: Vec<f64>) -> Result<Self> {
        Self::new(self.directions.clone(), radii, self.p)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn n_directions(&self) -> usize {
        self.directions.len()
    }

    pub fn n_radii(&self) -> usize {
        self.radii.len()
    }

    pub fn space(&self) -> &PointedMetricSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, direction: usize, radius: usize) -> usize {
        1 + direction * self.radii.len() + radius
    }

    /// `(direction, radius index)` of a non-base point.
    pub fn locate(&self, x: usize) -> Option<(usize, usize)> {
        if x == 0 || x >= self.len() {
            None
        } else {
            Some(((x - 1) / self.radii.len(), (x - 1) % self.radii.len()))
        }
    }

    /// Nominal radius (0 at the base).
    pub fn radius_of(&self, x: usize) -> f64 {
        self.locate(x).map_or(0.0, |(_, j)| self.radii[j])
    }
}

/// Gaussian directions normalized to the unit ℓ_p sphere.
pub fn random_directions(rng: &mut Rng, dim: usize, n: usize, p: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
            let norm = lp_norm(&v, p);
            if norm > 1e-9 {
                break v.into_iter().map(|c| c / norm).collect();
            }
        })
        .collect()
}

/// `2^(k/steps)` for `min_exp·steps ≤ k ≤ max_exp·steps`; exact at integer
/// exponents.
pub fn geometric_radii(min_exp: i32, max_exp: i32, steps: u32) -> Vec<f64> {
    let s = steps.max(1) as i32;
    (min_exp * s..=max_exp * s)
        .map(|k| {
            let (q, r) = (k.div_euclid(s), k.rem_euclid(s));
            pow2(q) * 2f64.powf(r as f64 / s as f64)
        })
        .collect()
}

/// Every `2^m` and `1.5·2^m` in `[lo, hi]`.
pub fn class_endpoints(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut m = floor_log2(lo) - 1;
    while pow2(m) <= hi {
        for r in [pow2(m), 1.5 * pow2(m)] {
            if r >= lo && r <= hi {
                out.push(r);
            }
        }
        m += 1;
    }
    out
}

/// Sorted union, merging values within a relative `1e-12`.
pub fn merge_radii(parts: &[&[f64]]) -> Vec<f64> {
    let mut all: Vec<f64> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for r in all {
        match out.last() {
            Some(&last) if r - last <= RADIUS_TOL * r => {}
            _ => out.push(r),
        }
    }
    out
}

/// `(α(t), β(t))`. With `2^m ≤ t < 2^(m+1)`: `(t − 2^(m−1), 2^(m−1))` up to
/// `1.5·2^m` and `(2^m, t − 2^m)` beyond.
pub fn alpha_beta(t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha/beta need a positive radius, got {t}")));
    }
    let a = pow2(floor_log2(t));
    if t <= 1.5 * a {
        Ok((t - 0.5 * a, 0.5 * a))
    } else {
        Ok((a, t - a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    L,
    R,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::L => "L",
            Side::R => "R",
        })
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" | "l" => Ok(Side::L),
            "R" | "r" => Ok(Side::R),
            _ => Err(Error::InvalidParameter(format!("side must be L or R, got {s}"))),
        }
    }
}

/// The radius interval of a nontrivial class on a ray, keyed by crown: for
/// `L` it is `[1.5·2^m, 2^(m+1)]` (α constant), for `R` it is
/// `[2^m, 1.5·2^m]` (β constant). `None` means the point is alone.
pub fn class_key(side: Side, t: f64) -> Option<i32> {
    let e = floor_log2(t);
    let a = pow2(e);
    match side {
        Side::L if is_power_of_two(t) => Some(e - 1),
        Side::L => (t >= 1.5 * a).then_some(e),
        Side::R => (t <= 1.5 * a).then_some(e),
    }
}

/// Endpoints of the class interval with key `m`.
pub fn class_interval(side: Side, m: i32) -> (f64, f64) {
    match side {
        Side::L => (1.5 * pow2(m), pow2(m + 1)),
        Side::R => (pow2(m), 1.5 * pow2(m)),
    }
}

pub fn lr_classes(net: &RadialNet, side: Side) -> Partition {
    let mut keys: HashMap<(usize, i32), usize> = HashMap::new();
    let mut next = 1;
    let labels: Vec<usize> = (0..net.len())
        .map(|x| match net.locate(x) {
            None => 0,
            Some((d, j)) => match class_key(side, net.radii()[j]) {
                Some(m) => *keys.entry((d, m)).or_insert_with(|| {
                    next += 1;
                    next - 1
                }),
                None => {
                    next += 1;
                    next - 1
                }
            },
        })
        .collect();
    Partition::from_labels(&labels)
}

/// Image radius on the same ray: `t/2 + 2^m` for `R` and `t/2 + 2^(m−1)` for
/// `L`, with `2^m < t ≤ 2^(m+1)`.
pub fn squeeze_radius(side: Side, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("squeeze needs a positive radius, got {t}")));
    }
    let m = crown_index(t);
    Ok(match side {
        Side::R => 0.5 * t + pow2(m),
        Side::L => 0.5 * t + pow2(m - 1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeImage {
    pub direction: usize,
    pub radius: f64,
    pub class: Option<i32>,
}

pub fn squeeze_map(net: &RadialNet, side: Side, x: usize) -> Result<SqueezeImage> {
    let (d, j) = net
        .locate(x)
        .ok_or_else(|| Error::InvalidParameter("the base point has no squeeze image".into()))?;
    let radius = squeeze_radius(side, net.radii()[j])?;
    Ok(SqueezeImage { direction: d, radius, class: class_key(side, radius) })
}

/// Lipschitz bounds claimed for the squeeze maps: `(‖map‖, ‖map⁻¹‖)`.
pub fn claimed_bounds(side: Side) -> (f64, f64) {
    match side {
        Side::R => (1.5, 1.0),
        Side::L => (1.0, 4.0 / 3.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioMax {
    pub value: f64,
    pub pair: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairViolation {
    pub pair: (usize, usize),
    pub forward: f64,
    pub inverse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilipReport {
    pub side: Side,
    pub pairs: usize,
    pub enriched_points: usize,
    pub forward: RatioMax,
    pub inverse: RatioMax,
    pub forward_bound: f64,
    pub inverse_bound: f64,
    pub epsilon: f64,
    pub violation_count: usize,
    /// The worst violations (at most 20), largest excess first.
    pub violations: Vec<PairViolation>,
}

impl BilipReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

/// Radii of the net used to measure quotient distances of images: the
/// original radii, their images, class endpoints, and `refinement` evenly
/// spaced points inside every class interval.
pub fn enriched_radii(radii: &[f64], side: Side, refinement: usize) -> Result<Vec<f64>> {
    let images: Vec<f64> = radii.iter().map(|&t| squeeze_radius(side, t)).collect::<Result<_>>()?;
    let base = merge_radii(&[radii, &images]);
    let (lo, hi) = (base[0], base[base.len() - 1]);
    let ends = class_endpoints(lo, hi);
    let mut extra = Vec::new();
    let mut m = floor_log2(lo) - 1;
    while pow2(m) <= hi {
        let (a, b) = class_interval(side, m);
        let (a, b) = (a.max(lo), b.min(hi));
        if a < b {
            for i in 1..=refinement {
                extra.push(a + (b - a) * i as f64 / (refinement + 1) as f64);
            }
        }
        m += 1;
    }
    Ok(merge_radii(&[&base, &ends, &extra]))
}

fn nearest_index(sorted: &[f64], t: f64) -> usize {
    let i = sorted.partition_point(|&r| r < t);
    if i == sorted.len() || (i > 0 && t - sorted[i - 1] <= sorted[i] - t) {
        i - 1
    } else {
        i
    }
}

/// Largest ratios `d̃(Sx, Sy)/d(x, y)` and `d(x, y)/d̃(Sx, Sy)` over all pairs
/// of net points, with `d̃` the quotient metric on an enriched net. Pairs
/// exceeding the claimed bounds by more than `epsilon` are flagged.
pub fn estimate_bilip(net: &RadialNet, side: Side, refinement: usize, epsilon: f64) -> Result<BilipReport> {
    let enriched = net.with_radii(enriched_radii(net.radii(), side, refinement)?)?;
    let part = lr_classes(&enriched, side);
    let images: Vec<usize> = (0..net.len())
        .map(|x| match net.locate(x) {
            None => Ok(0),
            Some(_) => {
                let img = squeeze_map(net, side, x)?;
                Ok(enriched.point(img.direction, nearest_index(enriched.radii(), img.radius)))
            }
        })
        .collect::<Result<_>>()?;
    let q = quotient_distances_among(enriched.space(), &part, &images);
    let n = net.len();
    let (fb, ib) = claimed_bounds(side);
    let rows: Vec<Vec<(usize, f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|a| {
            (a + 1..n)
                .map(|b| {
                    let dx = net.space().d(a, b);
                    let dq = q[a * n + b];
                    (b, dq / dx, dx / dq)
                })
                .collect()
        })
        .collect();
    let mut forward = RatioMax { value: 0.0, pair: (0, 0) };
    let mut inverse = RatioMax { value: 0.0, pair: (0, 0) };
    let mut violations = Vec::new();
    let mut pairs = 0;
    for (a, row) in rows.into_iter().enumerate() {
        for (b, fr, ir) in row {
            pairs += 1;
            if fr > forward.value {
                forward = RatioMax { value: fr, pair: (a, b) };
            }
            if ir > inverse.value {
                inverse = RatioMax { value: ir, pair: (a, b) };
            }
            if fr > fb + epsilon || ir > ib + epsilon {
                violations.push(PairViolation { pair: (a, b), forward: fr, inverse: ir });
            }
        }
    }
    let violation_count = violations.len();
    let excess = |v: &PairViolation| (v.forward - fb).max(v.inverse - ib);
    violations.sort_by(|u, v| excess(v).total_cmp(&excess(u)).then(u.pair.cmp(&v.pair)));
    violations.truncate(20);
    Ok(BilipReport {
        side,
        pairs,
        enriched_points: enriched.len(),
        forward,
        inverse,
        forward_bound: fb,
        inverse_bound: ib,
        epsilon,
        violation_count,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumDecomposition {
    /// Constant on `∼_L` classes.
    pub f: Vec<f64>,
    /// Constant on `∼_R` classes.
    pub g: Vec<f64>,
    /// Optimal `max(‖f‖_Lip, ‖g‖_Lip)` as reported by the LP.
    pub s_star: f64,
    /// The same quantity recomputed from `f` and `g` over all pairs.
    pub s_measured: f64,
    pub h_lip: f64,
    pub components: usize,
    pub rounds: usize,
    pub constraints: usize,
}

/// Union-find over net points with `f_x − f_parent` offsets.
struct Potentials {
    parent: Vec<usize>,
    off: Vec<f64>,
}

impl Potentials {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), off: vec![0.0; n] }
    }

    fn find(&mut self, x: usize) -> (usize, f64) {
        let p = self.parent[x];
        if p == x {
            return (x, 0.0);
        }
        let (r, o) = self.find(p);
        self.parent[x] = r;
        self.off[x] += o;
        (r, self.off[x])
    }

    /// Imposes `f_u − f_v = delta`; false if that contradicts earlier links.
    fn link(&mut self, u: usize, v: usize, delta: f64, tol: f64) -> bool {
        let (ru, ou) = self.find(u);
        let (rv, ov) = self.find(v);
        if ru == rv {
            return (ou - ov - delta).abs() <= tol;
        }
        self.parent[ru] = rv;
        self.off[ru] = delta - ou + ov;
        true
    }
}

const CUTS_PER_ROUND: usize = 400;

/// Minimizes `max(‖f‖_Lip, ‖g‖_Lip)` over `f + g = h` with `f` constant on
/// `∼_L` classes and `g` constant on `∼_R` classes, both vanishing at the
/// base. Class constraints fix `f` up to one constant per connected
/// component; the Lipschitz constraints are added lazily.
pub fn sum_decomposition_lp(net: &RadialNet, h: &[f64]) -> Result<SumDecomposition> {
    let n = net.len();
    if h.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.len() });
    }
    let mut h = h.to_vec();
    h[0] = 0.0;
    let space = net.space();
    let scale = h.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    let mut pot = Potentials::new(n);
    for (side, part) in [(Side::L, lr_classes(net, Side::L)), (Side::R, lr_classes(net, Side::R))] {
        for class in part.classes() {
            for w in class.windows(2) {
                let delta = if side == Side::L { 0.0 } else { h[w[0]] - h[w[1]] };
                if !pot.link(w[0], w[1], delta, tol) {
                    return Err(Error::DecompositionInfeasible(format!(
                        "class constraints disagree at points {} and {}",
                        w[0], w[1]
                    )));
                }
            }
        }
    }
    let found: Vec<(usize, f64)> = (0..n).map(|x| pot.find(x)).collect();
    let base_root = found[0].0;
    let mut var_of: HashMap<usize, usize> = HashMap::new();
    for &(r, _) in &found {
        if r != base_root {
            let next = var_of.len();
            var_of.entry(r).or_insert(next);
        }
    }
    let nv = var_of.len();
    // f_x = var[x] + k[x]
    let var: Vec<Option<usize>> = found.iter().map(|(r, _)| var_of.get(r).copied()).collect();
    let k: Vec<f64> = found.iter().map(|&(r, o)| if r == base_root { o - found[0].1 } else { o }).collect();

    let mut s_lb = 0.0f64;
    for a in 0..n {
        for b in a + 1..n {
            if found[a].0 == found[b].0 {
                let df = k[a] - k[b];
                let dg = h[a] - h[b] - df;
                s_lb = s_lb.max(df.abs().max(dg.abs()) / space.d(a, b));
            }
        }
    }

    let mut rows: Vec<Vec<f64>> = vec![{
        let mut r = vec![0.0; nv + 1];
        r[nv] = -1.0;
        r
    }];
    let mut rhs = vec![-s_lb];
    let add_pair = |rows: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>, a: usize, b: usize| {
        let d = space.d(a, b);
        let dk = k[a] - k[b];
        let dh = h[a] - h[b];
        for sign in [1.0, -1.0] {
            let mut r = vec![0.0; nv + 1];
            if let Some(i) = var[a] {
                r[i] += sign;
            }
            if let Some(i) = var[b] {
                r[i] -= sign;
            }
            r[nv] = -d;
            rows.push(r);
            rhs.push(if sign > 0.0 { (-dk).min(dh - dk) } else { dk.min(dk - dh) });
        }
    };
    let mut seeded = vec![false; nv];
    for x in 1..n {
        if let Some(i) = var[x] {
            if !seeded[i] {
                seeded[i] = true;
                add_pair(&mut rows, &mut rhs, x, 0);
            }
        }
    }
    let mut objective = vec![0.0; nv + 1];
    objective[nv] = -1.0;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let sol = lp::maximize(&objective, &rows, &rhs)?;
        let s = sol.x[nv];
        let f: Vec<f64> = (0..n).map(|x| var[x].map_or(0.0, |i| sol.x[i]) + k[x]).collect();
        let mut cuts: Vec<(f64, usize, usize)> = (0..n)
            .into_par_iter()
            .flat_map_iter(|a| {
                let (f, h, found) = (&f, &h, &found);
                (a + 1..n).filter_map(move |b| {
                    if found[a].0 == found[b].0 {
                        return None;
                    }
                    let d = space.d(a, b);
                    let df = f[a] - f[b];
                    let dg = h[a] - h[b] - df;
                    let excess = df.abs().max(dg.abs()) / d - s;
                    (excess > 1e-9 * (1.0 + s)).then_some((excess, a, b))
                })
            })
            .collect();
        if cuts.is_empty() {
            let g: Vec<f64> = h.iter().zip(&f).map(|(a, b)| a - b).collect();
            let s_measured = lip_norm(&f, space).max(lip_norm(&g, space));
            return Ok(SumDecomposition {
                f,
                g,
                s_star: s,
                s_measured,
                h_lip: lip_norm(&h, space),
                components: nv + 1,
                rounds,
                constraints: rows.len(),
            });
        }
        cuts.sort_by(|u, v| v.0.total_cmp(&u.0).then((u.1, u.2).cmp(&(v.1, v.2))));
        for &(_, a, b) in cuts.iter().take(CUTS_PER_ROUND) {
            add_pair(&mut rows, &mut rhs, a, b);
        }
    }
}
