//! Splittings of free spaces: annular cut-offs, the extension split over a
//! subset, and unions of pieces glued at the base or along a common subset.
//!
//! Every isomorphism is realized as a concrete [`LinearLipMap`] on function
//! spaces, and its norm and the norm of its inverse are computed exactly.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::free_norm::{free_norm, FreeVector, NormSolver};
use crate::lip_ops::{normalize_subset, LinearExtensionOperator};
use crate::metric::{BasePolicy, Point, PointedMetricSpace};
use crate::numeric::{crown_index, pow2};
use crate::opnorm::{LinearLipMap, Piece};
use crate::quotient::collapse_subset;
use crate::rng::Rng;

pub const KALTON_CONSTANT: f64 = 72.0;

/// Weight of a point at radius `r` in the `k`-th annular piece: rises
/// linearly in `log₂ r` on `(2^(k−1), 2^k]` and falls on `(2^k, 2^(k+1)]`.
pub fn kalton_weight(r: f64, k: i32) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let l = r.log2();
    let kf = k as f64;
    Ok(if r <= pow2(k - 1) || r > pow2(k + 1) {
        0.0
    } else if r <= pow2(k) {
        l - kf + 1.0
    } else {
        kf + 1.0 - l
    })
}

/// `μ = Σ_k parts[k]`, part `k` supported in `B_{2^(k+1)} ∖ B_{2^(k−1)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnularSplit {
    pub parts: BTreeMap<i32, FreeVector>,
}

impl AnnularSplit {
    pub fn reconstruct(&self) -> FreeVector {
        self.parts.values().fold(FreeVector::new(), |acc, p| acc.plus(p))
    }

    /// `Σ_k ‖parts[k]‖`.
    pub fn sum_of_norms(&self, space: &PointedMetricSpace, solver: NormSolver) -> Result<f64> {
        let mut total = 0.0;
        for p in self.parts.values() {
            total += free_norm(p, space, solver)?;
        }
        Ok(total)
    }
}

/// Splits every coefficient between the two annuli containing its point. The
/// smaller share is computed first and the larger one as the exact remainder,
/// so the parts add back to `μ` without rounding.
pub fn kalton_split(mu: &FreeVector, space: &PointedMetricSpace) -> Result<AnnularSplit> {
    let mut parts: BTreeMap<i32, FreeVector> = BTreeMap::new();
    for (x, c) in mu.canonical(space.base()).iter() {
        if x >= space.len() {
            return Err(Error::IndexOutOfRange { index: x, len: space.len() });
        }
        let r = space.radius(x);
        let m = crown_index(r);
        let upper = kalton_weight(r, m + 1)?;
        let lower = 1.0 - upper;
        let (small_k, big_k, w) = if upper <= lower { (m + 1, m, upper) } else { (m, m + 1, lower) };
        let small = w * c;
        let big = c - small;
        let small = c - big;
        for (k, v) in [(small_k, small), (big_k, big)] {
            if v != 0.0 {
                parts.entry(k).or_default().add_at(x, v);
            }
        }
    }
    parts.retain(|_, p| !p.is_zero());
    Ok(AnnularSplit { parts })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KaltonReport {
    pub norm: f64,
    pub sum_of_norms: f64,
    pub ratio: f64,
    pub parts: usize,
    pub exact_reconstruction: bool,
}

pub fn kalton_check(mu: &FreeVector, space: &PointedMetricSpace, solver: NormSolver) -> Result<KaltonReport> {
    let split = kalton_split(mu, space)?;
    let mu = mu.canonical(space.base());
    let norm = free_norm(&mu, space, solver)?;
    let sum_of_norms = split.sum_of_norms(space, solver)?;
    Ok(KaltonReport {
        norm,
        sum_of_norms,
        ratio: if norm > 0.0 { sum_of_norms / norm } else { 0.0 },
        parts: split.parts.len(),
        exact_reconstruction: split.reconstruct() == mu,
    })
}

/// Random cloud in ℝ³ (Euclidean) with radii `2^u`, `u` uniform in
/// `[min_exp, max_exp]`, and a random vector on all non-base points.
pub fn random_kalton_instance(rng: &mut Rng, n: usize, min_exp: f64, max_exp: f64) -> (PointedMetricSpace, FreeVector) {
    loop {
        let mut coords = vec![vec![0.0; 3]];
        for _ in 0..n {
            let r = 2f64.powf(rng.range(min_exp, max_exp));
            let v: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            coords.push(v.iter().map(|c| r * c / norm).collect());
        }
        if let Ok(space) = PointedMetricSpace::from_point_cloud(coords, 2.0, 0) {
            let mu = FreeVector::from_pairs((1..=n).map(|x| (x, rng.range(-1.0, 1.0))));
            return (space, mu);
        }
    }
}

/// A piece of a separated sum with its declared annulus `(2^r, 2^s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnularPart {
    pub vector: FreeVector,
    pub inner: i32,
    pub outer: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedReport {
    /// `min_k (r_{k+1} − s_k)`; `None` for a single part.
    pub theta: Option<i32>,
    pub constant: f64,
    pub norm_of_sum: f64,
    pub sum_of_norms: f64,
    /// `‖Σγ_k‖ − c·Σ‖γ_k‖`.
    pub slack: f64,
}

/// Checks `‖γ₁ + ⋯ + γ_n‖ ≥ (2^θ − 1)/(2^θ + 1) · Σ‖γ_k‖` for parts living in
/// annuli separated by at least `θ` octaves. With one part the constant is 1.
pub fn separated_lower_bound_check(
    parts: &[AnnularPart],
    space: &PointedMetricSpace,
    solver: NormSolver,
) -> Result<SeparatedReport> {
    if parts.is_empty() {
        return Err(Error::Empty);
    }
    for w in parts.windows(2) {
        if w[0].outer >= w[1].inner {
            return Err(Error::BadExponentSequence);
        }
    }
    if parts.iter().any(|p| p.inner >= p.outer) {
        return Err(Error::BadExponentSequence);
    }
    for p in parts {
        let (inner, outer) = (pow2(p.inner), pow2(p.outer));
        for (x, _) in p.vector.canonical(space.base()).iter() {
            if x >= space.len() {
                return Err(Error::IndexOutOfRange { index: x, len: space.len() });
            }
            let radius = space.radius(x);
            if !(radius > inner && radius <= outer) {
                return Err(Error::OutsideAnnulus { point: x, radius, inner, outer });
            }
        }
    }
    let theta = parts.windows(2).map(|w| w[1].inner - w[0].outer).min();
    let constant = theta.map_or(1.0, |t| {
        let e = pow2(t);
        (e - 1.0) / (e + 1.0)
    });
    let mut total = FreeVector::new();
    let mut sum_of_norms = 0.0;
    for p in parts {
        let v = p.vector.canonical(space.base());
        sum_of_norms += free_norm(&v, space, solver)?;
        total = total.plus(&v);
    }
    let norm_of_sum = free_norm(&total, space, solver)?;
    Ok(SeparatedReport { theta, constant, norm_of_sum, sum_of_norms, slack: norm_of_sum - constant * sum_of_norms })
}

/// Parts in `(2^r_k, 2^s_k]` with random gaps of 1 to 3 octaves, a few random
/// points each, in the plane.
pub fn random_separated_instance(rng: &mut Rng, parts: usize, points_per_part: usize) -> (PointedMetricSpace, Vec<AnnularPart>) {
    loop {
        let mut coords = vec![vec![0.0, 0.0]];
        let mut out = Vec::new();
        let mut r = rng.int_between(-4, 0) as i32;
        for _ in 0..parts {
            let s = r + rng.int_between(1, 2) as i32;
            let mut v = FreeVector::new();
            for _ in 0..points_per_part {
                let t = 2f64.powf(rng.range(r as f64, s as f64)).max(pow2(r) * (1.0 + 1e-9));
                let a = rng.range(0.0, std::f64::consts::TAU);
                coords.push(vec![t * a.cos(), t * a.sin()]);
                v.add_at(coords.len() - 1, rng.range(-1.0, 1.0));
            }
            out.push(AnnularPart { vector: v, inner: r, outer: s });
            r = s + rng.int_between(1, 3) as i32;
        }
        if let Ok(space) = PointedMetricSpace::from_point_cloud(coords, 2.0, 0) {
            let fits = out.iter().all(|p| {
                p.vector.iter().all(|(x, _)| {
                    let t = space.radius(x);
                    t > pow2(p.inner) && t <= pow2(p.outer)
                })
            });
            if fits {
                return (space, out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtFmReport {
    pub e_norm: f64,
    pub phi_norm: f64,
    pub phi_inv_norm: f64,
    pub distortion: f64,
    /// `‖E‖ + 1`, the bound for each of the two norms.
    pub factor_bound: f64,
    pub distortion_bound: f64,
}

/// Rows of `h ↦ h − E(h|_F)` read on the classes of a collapse: the
/// representative of each class, or the zero row for the class of `F`.
fn remainder_rows(e: &LinearExtensionOperator, members: &[usize], projection: &[usize], q: &PointedMetricSpace) -> Vec<Vec<f64>> {
    let n = e.space().len();
    let mut rows = vec![vec![0.0; n]; q.len()];
    let mut seen = vec![false; q.len()];
    for &x in members {
        let c = projection[x];
        if seen[c] || c == q.base() {
            continue;
        }
        seen[c] = true;
        rows[c][x] += 1.0;
        for (z, &w) in e.weights()[x].iter().enumerate() {
            rows[c][e.subset()[z]] -= w;
        }
    }
    rows
}

/// `Φ(f, g) = E f + g∘π` from `Lip₀(F) ⊕∞ Lip₀(M/F)` onto `Lip₀(M)` and its
/// inverse `h ↦ (h|_F, h − E(h|_F))`, with exact norms.
pub fn ext_fm_distortion(e: &LinearExtensionOperator, solver: NormSolver) -> Result<ExtFmReport> {
    let space = e.space();
    let n = space.len();
    let collapse = collapse_subset(space, e.subset())?;
    let q = &collapse.space;
    let k = e.subset().len();
    let mut phi = LinearLipMap::zeros(
        vec![Piece::Lip(e.subspace().clone()), Piece::Lip(q.clone())],
        vec![Piece::Lip(space.clone())],
    );
    for x in 0..n {
        for z in 0..k {
            phi.set(0, x, 0, z, e.weights()[x][z]);
        }
        phi.set(0, x, 1, collapse.projection[x], 1.0);
    }
    let mut inv_rows: Vec<Vec<f64>> = e.subset().iter().map(|&z| {
        let mut r = vec![0.0; n];
        r[z] = 1.0;
        r
    }).collect();
    let all: Vec<usize> = (0..n).collect();
    inv_rows.extend(remainder_rows(e, &all, &collapse.projection, q));
    let inv = LinearLipMap::new(
        vec![Piece::Lip(space.clone())],
        vec![Piece::Lip(e.subspace().clone()), Piece::Lip(q.clone())],
        inv_rows,
    )?;
    let e_norm = e.norm(solver)?.value;
    let phi_norm = phi.norm(solver)?.value;
    let phi_inv_norm = inv.norm(solver)?.value;
    Ok(ExtFmReport {
        e_norm,
        phi_norm,
        phi_inv_norm,
        distortion: phi_norm * phi_inv_norm,
        factor_bound: e_norm + 1.0,
        distortion_bound: (e_norm + 1.0).powi(2),
    })
}

fn check_pieces(space: &PointedMetricSpace, pieces: &[Vec<usize>], shared: &[usize]) -> Result<Vec<Vec<usize>>> {
    let n = space.len();
    let mut owner = vec![None; n];
    let mut out = Vec::with_capacity(pieces.len());
    for (g, piece) in pieces.iter().enumerate() {
        let mut p = piece.clone();
        p.sort_unstable();
        p.dedup();
        for &x in &p {
            if x >= n {
                return Err(Error::IndexOutOfRange { index: x, len: n });
            }
            if shared.contains(&x) {
                continue;
            }
            match owner[x] {
                Some(h) if h != g => return Err(Error::PiecesOverlap(x)),
                _ => owner[x] = Some(g),
            }
        }
        out.push(p);
    }
    if let Some(x) = (0..n).find(|&x| owner[x].is_none() && !shared.contains(&x)) {
        return Err(Error::InvalidParameter(format!("point {x} belongs to no piece")));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalReport {
    /// Smallest `C ≥ 1` with `d(x,0) + d(y,0) ≤ C·d(x,y)` across pieces.
    pub c: f64,
    /// Exact norm of the concatenation map `(f_γ) ↦ h`, `h|_{M_γ} = f_γ`.
    pub concat_norm: f64,
    /// Exact norm of its inverse (restriction to the pieces).
    pub restrict_norm: f64,
    /// Per test vector: `(‖μ‖, Σ_γ ‖μ|_{M_γ}‖, max(1,C)·‖μ‖)`.
    pub sandwiches: Vec<(f64, f64, f64)>,
}

impl OrthogonalReport {
    /// Smallest slack over both sandwich inequalities.
    pub fn min_slack(&self) -> f64 {
        self.sandwiches.iter().map(|&(a, b, c)| (b - a).min(c - b)).fold(f64::INFINITY, f64::min)
    }
}

/// Pieces glued at the base only. Every non-base point must lie in exactly
/// one piece; the base is added to each piece.
pub fn orthogonal_union_check(
    space: &PointedMetricSpace,
    pieces: &[Vec<usize>],
    tests: &[FreeVector],
    solver: NormSolver,
) -> Result<OrthogonalReport> {
    let base = space.base();
    let pieces: Vec<Vec<usize>> = check_pieces(space, pieces, &[base])?
        .into_iter()
        .map(|mut p| {
            if p.binary_search(&base).is_err() {
                p.push(base);
                p.sort_unstable();
            }
            p
        })
        .collect();
    let mut c = 1.0f64;
    for (g, pg) in pieces.iter().enumerate() {
        for ph in &pieces[g + 1..] {
            for &x in pg.iter().filter(|&&x| x != base) {
                for &y in ph.iter().filter(|&&y| y != base) {
                    c = c.max((space.radius(x) + space.radius(y)) / space.d(x, y));
                }
            }
        }
    }
    let subs: Vec<PointedMetricSpace> =
        pieces.iter().map(|p| space.restrict(p, BasePolicy::Keep).map(|s| s.0)).collect::<Result<_>>()?;
    let n = space.len();
    let mut concat = LinearLipMap::zeros(subs.iter().cloned().map(Piece::Lip).collect(), vec![Piece::Lip(space.clone())]);
    let mut restrict_rows = Vec::new();
    for (g, p) in pieces.iter().enumerate() {
        for (j, &x) in p.iter().enumerate() {
            concat.set(0, x, g, j, 1.0);
            let mut r = vec![0.0; n];
            r[x] = 1.0;
            restrict_rows.push(r);
        }
    }
    let restrict = LinearLipMap::new(vec![Piece::Lip(space.clone())], subs.iter().cloned().map(Piece::Lip).collect(), restrict_rows)?;
    let mut sandwiches = Vec::new();
    for mu in tests {
        let mu = mu.canonical(base);
        let whole = free_norm(&mu, space, solver)?;
        let mut split = 0.0;
        for (p, sub) in pieces.iter().zip(&subs) {
            let part = FreeVector::from_pairs(mu.iter().filter(|(x, _)| p.binary_search(x).is_ok()));
            let local = crate::free_norm::restriction_projection(&part, p)?;
            split += free_norm(&local, sub, solver)?;
        }
        sandwiches.push((whole, split, c.max(1.0) * whole));
    }
    Ok(OrthogonalReport {
        c,
        concat_norm: concat.norm(solver)?.value,
        restrict_norm: restrict.norm(solver)?.value,
        sandwiches,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GodardPiece {
    pub piece: usize,
    /// Point chosen as the piece's own base (lowest index).
    pub local_base: usize,
    pub phi_norm: f64,
    pub phi_inv_norm: f64,
    pub phi_norm_closed: f64,
    pub phi_inv_norm_closed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GodardReport {
    /// Applied rescaling so that `A ≤ 1 ≤ B`.
    pub scale: f64,
    pub a: f64,
    pub b: f64,
    pub pieces: Vec<GodardPiece>,
    pub max_phi: f64,
    pub max_phi_inv: f64,
    pub distortion: f64,
    pub phi_bound: f64,
    pub phi_inv_bound: f64,
    pub distortion_bound: f64,
}

/// Pieces whose mutual distances lie in `[A, B]`; piece 0 holds the base `p`.
/// For every other piece builds `f ↦ (f − f(0_γ), f(0_γ))` on
/// `Lip_p(M_γ ∪ {p})` and its inverse `(f, r) ↦ f + r`, and computes both
/// norms exactly. `A` and `B` default to the extreme cross distances.
pub fn separated_union_decompose(
    space: &PointedMetricSpace,
    pieces: &[Vec<usize>],
    bounds: Option<(f64, f64)>,
    solver: NormSolver,
) -> Result<GodardReport> {
    let pieces = check_pieces(space, pieces, &[])?;
    if pieces.is_empty() || pieces[0].binary_search(&space.base()).is_err() {
        return Err(Error::BaseNotInSubset(space.base()));
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (g, pg) in pieces.iter().enumerate() {
        for ph in &pieces[g + 1..] {
            for &x in pg {
                for &y in ph {
                    lo = lo.min(space.d(x, y));
                    hi = hi.max(space.d(x, y));
                }
            }
        }
    }
    let (a, b) = bounds.unwrap_or((lo, hi));
    if !(a > 0.0 && a <= b) {
        return Err(Error::InvalidParameter(format!("need 0 < A <= B, got A = {a}, B = {b}")));
    }
    if lo < a || hi > b {
        return Err(Error::SeparationViolated(if lo < a { lo } else { hi }, a, b));
    }
    let scale = if a <= 1.0 && 1.0 <= b { 1.0 } else { 1.0 / (a * b).sqrt() };
    let scaled = if scale == 1.0 { space.clone() } else { space.scale(scale)? };
    let (a, b) = (a * scale, b * scale);
    let p = scaled.base();
    let mut out = Vec::new();
    for (g, piece) in pieces.iter().enumerate().skip(1) {
        let local_base = piece[0];
        let mut with_p = piece.clone();
        with_p.push(p);
        let (dom, idx) = scaled.restrict(&with_p, BasePolicy::Keep)?;
        let (loc, loc_idx) = scaled.restrict(piece, BasePolicy::Explicit(local_base))?;
        let at = |x: usize| idx.binary_search(&x).expect("point of piece");
        let mut phi = LinearLipMap::zeros(vec![Piece::Lip(dom.clone())], vec![Piece::Lip(loc.clone()), Piece::Scalar]);
        let mut inv = LinearLipMap::zeros(vec![Piece::Lip(loc.clone()), Piece::Scalar], vec![Piece::Lip(dom.clone())]);
        for (i, &x) in loc_idx.iter().enumerate() {
            phi.set(0, i, 0, at(x), 1.0);
            if x != local_base {
                phi.set(0, i, 0, at(local_base), -1.0);
            } else {
                phi.set(0, i, 0, at(x), 0.0);
            }
            inv.set(0, at(x), 0, i, 1.0);
            inv.set(0, at(x), 1, 0, 1.0);
        }
        phi.set(1, 0, 0, at(local_base), 1.0);
        let phi_norm_closed = if piece.len() > 1 { scaled.d(local_base, p).max(1.0) } else { scaled.d(local_base, p) };
        let phi_inv_norm_closed = piece
            .iter()
            .map(|&x| (scaled.d(x, local_base) + 1.0) / scaled.d(x, p))
            .fold(if piece.len() > 1 { 1.0 } else { 0.0 }, f64::max);
        out.push(GodardPiece {
            piece: g,
            local_base,
            phi_norm: phi.norm(solver)?.value,
            phi_inv_norm: inv.norm(solver)?.value,
            phi_norm_closed,
            phi_inv_norm_closed,
        });
    }
    let max_phi = out.iter().map(|g| g.phi_norm).fold(1.0, f64::max);
    let max_phi_inv = out.iter().map(|g| g.phi_inv_norm).fold(1.0, f64::max);
    Ok(GodardReport {
        scale,
        a,
        b,
        pieces: out,
        max_phi,
        max_phi_inv,
        distortion: max_phi * max_phi_inv,
        phi_bound: b,
        phi_inv_bound: (b + 1.0) / a,
        distortion_bound: b * (b + 1.0) / a,
    })
}

/// Clusters of up to `max_size` points around well separated centres in the
/// plane, cluster radius at most a quarter of the centre spacing.
pub fn random_separated_clusters(rng: &mut Rng, clusters: usize, max_size: usize) -> (PointedMetricSpace, Vec<Vec<usize>>) {
    loop {
        let spacing = rng.range(0.5, 4.0);
        let spread = rng.range(0.0, 0.25) * spacing;
        let mut coords = Vec::new();
        let mut pieces = Vec::new();
        for c in 0..clusters {
            let centre = [spacing * c as f64, spacing * rng.range(-0.3, 0.3)];
            let size = 1 + rng.below(max_size.max(1));
            let mut piece = Vec::new();
            for i in 0..size {
                let (dx, dy) = if i == 0 { (0.0, 0.0) } else { (rng.range(-spread, spread), rng.range(-spread, spread)) };
                piece.push(coords.len());
                coords.push(vec![centre[0] + dx, centre[1] + dy]);
            }
            pieces.push(piece);
        }
        if let Ok(space) = PointedMetricSpace::from_point_cloud(coords, 2.0, 0) {
            return (space, pieces);
        }
    }
}

/// Planar star: `legs` rays from the base with up to `max_leg` jittered
/// points each. Pieces include the base.
pub fn random_star(rng: &mut Rng, legs: usize, max_leg: usize) -> (PointedMetricSpace, Vec<Vec<usize>>) {
    let legs = legs.max(1);
    loop {
        let mut coords = vec![vec![0.0, 0.0]];
        let mut pieces = Vec::new();
        for l in 0..legs {
            let angle = std::f64::consts::TAU * (l as f64 + rng.range(0.0, 0.5)) / legs as f64;
            let mut piece = vec![0];
            for _ in 0..1 + rng.below(max_leg.max(1)) {
                let t = rng.range(0.1, 2.0);
                piece.push(coords.len());
                coords.push(vec![t * angle.cos() + rng.range(-0.05, 0.05), t * angle.sin()]);
            }
            pieces.push(piece);
        }
        if let Ok(space) = PointedMetricSpace::from_point_cloud(coords, 2.0, 0) {
            return (space, pieces);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Union2Report {
    pub c: f64,
    pub e_norm: f64,
    pub psi_norm: f64,
    pub psi_inv_norm: f64,
    pub distortion: f64,
    pub bound: f64,
}

/// `M ∪ N` with `F = M ∩ N ∋ 0`. The three-summand isomorphism
/// `Ψ(f, g, k) = E f + (g ⊔ k)∘π` from `Lip₀(F) ⊕∞ Lip₀(M/F) ⊕∞ Lip₀(N/F)`
/// onto `Lip₀(M ∪ N)` is built explicitly and its distortion compared with
/// `C(‖E‖ + 1)²`. `E` must extend from `F` to the whole space.
pub fn union2_check(
    space: &PointedMetricSpace,
    m: &[usize],
    n_set: &[usize],
    e: &LinearExtensionOperator,
    solver: NormSolver,
) -> Result<Union2Report> {
    let m = normalize_subset(space, m)?;
    let nn = normalize_subset(space, n_set)?;
    let f: Vec<usize> = m.iter().copied().filter(|x| nn.binary_search(x).is_ok()).collect();
    if f != e.subset() || e.space() != space {
        return Err(Error::NotAnExtension("operator must extend from M ∩ N to M ∪ N".into()));
    }
    let total = space.len();
    if (0..total).any(|x| m.binary_search(&x).is_err() && nn.binary_search(&x).is_err()) {
        return Err(Error::InvalidParameter("M ∪ N must cover the space".into()));
    }
    let mut c = 1.0f64;
    for &x in m.iter().filter(|x| f.binary_search(x).is_err()) {
        for &y in nn.iter().filter(|y| f.binary_search(y).is_err()) {
            c = c.max((space.dist_to_set(x, &f) + space.dist_to_set(y, &f)) / space.d(x, y));
        }
    }
    let mut quotients = Vec::new();
    for set in [&m, &nn] {
        let (sub, idx) = space.restrict(set, BasePolicy::Keep)?;
        let local_f: Vec<usize> = f.iter().map(|z| idx.binary_search(z).expect("F inside the piece")).collect();
        let col = collapse_subset(&sub, &local_f)?;
        let mut projection = vec![usize::MAX; total];
        for (i, &x) in idx.iter().enumerate() {
            projection[x] = col.projection[i];
        }
        quotients.push((set.clone(), col.space, projection));
    }
    let domain = vec![
        Piece::Lip(e.subspace().clone()),
        Piece::Lip(quotients[0].1.clone()),
        Piece::Lip(quotients[1].1.clone()),
    ];
    let mut psi = LinearLipMap::zeros(domain.clone(), vec![Piece::Lip(space.clone())]);
    for x in 0..total {
        for (z, &w) in e.weights()[x].iter().enumerate() {
            psi.set(0, x, 0, z, w);
        }
        if f.binary_search(&x).is_err() {
            let piece = if m.binary_search(&x).is_ok() { 0 } else { 1 };
            psi.set(0, x, 1 + piece, quotients[piece].2[x], 1.0);
        }
    }
    let mut inv_rows: Vec<Vec<f64>> = f
        .iter()
        .map(|&z| {
            let mut r = vec![0.0; total];
            r[z] = 1.0;
            r
        })
        .collect();
    for (set, q, projection) in &quotients {
        inv_rows.extend(remainder_rows(e, set, projection, q));
    }
    let inv = LinearLipMap::new(vec![Piece::Lip(space.clone())], domain, inv_rows)?;
    let e_norm = e.norm(solver)?.value;
    let psi_norm = psi.norm(solver)?.value;
    let psi_inv_norm = inv.norm(solver)?.value;
    Ok(Union2Report {
        c,
        e_norm,
        psi_norm,
        psi_inv_norm,
        distortion: psi_norm * psi_inv_norm,
        bound: c * (e_norm + 1.0).powi(2),
    })
}

/// Random plane cloud split into `M ∖ F`, `N ∖ F` and a common part `F ∋ 0`.
pub fn random_gluing(rng: &mut Rng, n: usize) -> (PointedMetricSpace, Vec<usize>, Vec<usize>) {
    let n = n.max(3);
    let space = crate::sample::random_cloud_lp(rng, n, 2, 2.0, 1.0);
    let f_size = 1 + rng.below(n - 2);
    let f = crate::sample::random_subset_with(rng, n, f_size, space.base());
    let (mut m, mut nn) = (f.clone(), f.clone());
    let mut rest: Vec<usize> = (0..n).filter(|x| f.binary_search(x).is_err()).collect();
    rng.shuffle(&mut rest);
    for (i, x) in rest.into_iter().enumerate() {
        if i == 0 || (i > 1 && rng.bernoulli(0.5)) {
            m.push(x);
        } else {
            nn.push(x);
        }
    }
    m.sort_unstable();
    nn.sort_unstable();
    (space, m, nn)
}

/// Two legs glued at the base (used in tests and examples): points
/// `(t, 0)` and `(0, t)` style, here as explicit ids `a{i}` and `b{i}`.
pub fn two_legs(a: &[f64], b: &[f64], angle: f64) -> Result<(PointedMetricSpace, Vec<Vec<usize>>)> {
    let mut pts = vec![Point::with_coords("0", vec![0.0, 0.0])];
    let mut pa = vec![0];
    let mut pb = vec![0];
    for (i, &t) in a.iter().enumerate() {
        pa.push(pts.len());
        pts.push(Point::with_coords(format!("a{i}"), vec![t, 0.0]));
    }
    for (i, &t) in b.iter().enumerate() {
        pb.push(pts.len());
        pts.push(Point::with_coords(format!("b{i}"), vec![t * angle.cos(), t * angle.sin()]));
    }
    Ok((PointedMetricSpace::from_points_lp(pts, 2.0, 0)?, vec![pa, pb]))
}
