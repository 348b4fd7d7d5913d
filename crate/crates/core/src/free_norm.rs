//! Lipschitz norms, free-space norms and the duality pairing between them.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::flow::min_cost_transport;
use crate::lp;
use crate::metric::PointedMetricSpace;
use crate::numeric::{compensated_sum, NeumaierSum};

/// Real function on the points of a space, vanishing at the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct LipFunction {
    values: Vec<f64>,
}

impl LipFunction {
    /// Takes the given values and forces `values[base] = 0`.
    pub fn new(mut values: Vec<f64>, base: usize) -> Self {
        if base < values.len() {
            values[base] = 0.0;
        }
        Self { values }
    }

    pub fn zero(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    /// `x ↦ d(x, 0)`.
    pub fn distance_to_base(space: &PointedMetricSpace) -> Self {
        Self::new((0..space.len()).map(|x| space.radius(x)).collect(), space.base())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Finitely supported combination `Σ μ(x) δ_x`. Zero coefficients are never
/// stored. The base coefficient may be stored but is ignored by every norm
/// (`δ_0 = 0`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FreeVector {
    coeffs: BTreeMap<usize, f64>,
}

impl FreeVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn delta(x: usize) -> Self {
        Self::from_pairs([(x, 1.0)])
    }

    /// `δ_x − δ_y`.
    pub fn dipole(x: usize, y: usize) -> Self {
        let mut v = Self::delta(x);
        v.add_at(y, -1.0);
        v
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, f64)>>(pairs: I) -> Self {
        let mut v = Self::new();
        for (x, c) in pairs {
            v.add_at(x, c);
        }
        v
    }

    pub fn from_dense(values: &[f64]) -> Self {
        Self::from_pairs(values.iter().copied().enumerate())
    }

    pub fn add_at(&mut self, x: usize, c: f64) {
        let e = self.coeffs.entry(x).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.coeffs.remove(&x);
        }
    }

    pub fn get(&self, x: usize) -> f64 {
        self.coeffs.get(&x).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs.iter().map(|(&x, &c)| (x, c))
    }

    pub fn support(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    /// Drops the base coefficient.
    pub fn canonical(&self, base: usize) -> Self {
        let mut v = self.clone();
        v.coeffs.remove(&base);
        v
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (x, c) in self.iter() {
            out[x] += c;
        }
        out
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self::from_pairs(self.iter().map(|(x, c)| (x, lambda * c)))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut v = self.clone();
        for (x, c) in other.iter() {
            v.add_at(x, c);
        }
        v
    }

    fn check_in(&self, n: usize) -> Result<()> {
        match self.max_index() {
            Some(i) if i >= n => Err(Error::IndexOutOfRange { index: i, len: n }),
            _ => Ok(()),
        }
    }
}

/// Which method computes the free norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormSolver {
    /// Linear program over the Lipschitz unit ball.
    Lp,
    /// Minimum-cost transport of the base-balanced measure.
    #[default]
    Flow,
}

/// Optimal transport plan in point indices of the space.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

/// `max |f(i) − f(j)| / d(i, j)` over distinct pairs.
pub fn lip_norm(f: &[f64], space: &PointedMetricSpace) -> f64 {
    let n = space.len();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            best = best.max((f[i] - f[j]).abs() / space.d(i, j));
        }
    }
    best
}

/// Free norm as the optimum of `max Σ μ(x) f(x)` over 1-Lipschitz `f` with
/// `f(0) = 0`. Both inequalities of every unordered pair are constraints.
/// Returns the optimum and an optimal vertex `f`.
pub fn free_norm_dual(mu: &FreeVector, space: &PointedMetricSpace) -> Result<(f64, LipFunction)> {
    let n = space.len();
    mu.check_in(n)?;
    let base = space.base();
    let mu = mu.canonical(base);
    if mu.is_zero() {
        return Ok((0.0, LipFunction::zero(n)));
    }
    // variable k stands for the k-th non-base point
    let var = |x: usize| if x < base { Some(x) } else if x > base { Some(x - 1) } else { None };
    let nv = n - 1;
    let mut a = Vec::with_capacity(n * (n - 1));
    let mut b = Vec::with_capacity(n * (n - 1));
    for u in 0..n {
        for v in u + 1..n {
            for (p, q) in [(u, v), (v, u)] {
                let mut row = vec![0.0; nv];
                if let Some(k) = var(p) {
                    row[k] += 1.0;
                }
                if let Some(k) = var(q) {
                    row[k] -= 1.0;
                }
                a.push(row);
                b.push(space.d(u, v));
            }
        }
    }
    let mut c = vec![0.0; nv];
    for (x, m) in mu.iter() {
        c[var(x).expect("base removed")] = m;
    }
    let sol = lp::maximize(&c, &a, &b)?;
    let mut values = vec![0.0; n];
    for x in 0..n {
        if let Some(k) = var(x) {
            values[x] = sol.x[k];
        }
    }
    let f = LipFunction::new(values, base);
    let value = pairing(&f, &mu)?;
    Ok((value, f))
}

/// Free norm as the minimum cost of transporting the positive part of the
/// base-balanced measure onto its negative part.
pub fn free_norm_flow(mu: &FreeVector, space: &PointedMetricSpace) -> (f64, TransportPlan) {
    let base = space.base();
    let mu = mu.canonical(base);
    let total = compensated_sum(mu.iter().map(|(_, c)| c));
    let mut balanced = mu.clone();
    balanced.add_at(base, -total);
    let mut src = Vec::new();
    let mut snk = Vec::new();
    for (x, c) in balanced.iter() {
        if c > 0.0 {
            src.push((x, c));
        } else if c < 0.0 {
            snk.push((x, -c));
        }
    }
    let supply: Vec<f64> = src.iter().map(|p| p.1).collect();
    let demand: Vec<f64> = snk.iter().map(|p| p.1).collect();
    let t = min_cost_transport(&supply, &demand, |i, j| space.d(src[i].0, snk[j].0));
    let flows = t.flows.iter().map(|&(i, j, m)| (src[i].0, snk[j].0, m)).collect();
    (t.cost, TransportPlan { flows, cost: t.cost })
}

pub fn free_norm(mu: &FreeVector, space: &PointedMetricSpace, solver: NormSolver) -> Result<f64> {
    match solver {
        NormSolver::Lp => free_norm_dual(mu, space).map(|r| r.0),
        NormSolver::Flow => {
            mu.check_in(space.len())?;
            Ok(free_norm_flow(mu, space).0)
        }
    }
}

/// `Σ μ(x) f(x)`.
pub fn pairing(f: &LipFunction, mu: &FreeVector) -> Result<f64> {
    mu.check_in(f.len()).map_err(|_| Error::DimensionMismatch {
        expected: f.len(),
        got: mu.max_index().map_or(0, |i| i + 1),
    })?;
    let mut acc = NeumaierSum::new();
    for (x, c) in mu.iter() {
        acc.add(c * f.get(x));
    }
    Ok(acc.value())
}

/// Lipschitz constant of a point map `map: M → N` given as an index table.
pub fn map_lip_constant(map: &[usize], m: &PointedMetricSpace, n: &PointedMetricSpace) -> f64 {
    let mut best = 0.0f64;
    for x in 0..m.len() {
        for y in x + 1..m.len() {
            best = best.max(n.d(map[x], map[y]) / m.d(x, y));
        }
    }
    best
}

/// Linearisation of a base-preserving point map: `(L̂μ)(y) = Σ_{L(x)=y} μ(x)`.
pub fn pushforward(
    map: &[usize],
    m: &PointedMetricSpace,
    n: &PointedMetricSpace,
    mu: &FreeVector,
) -> Result<FreeVector> {
    if map.len() != m.len() {
        return Err(Error::DimensionMismatch { expected: m.len(), got: map.len() });
    }
    if let Some(&bad) = map.iter().find(|&&y| y >= n.len()) {
        return Err(Error::IndexOutOfRange { index: bad, len: n.len() });
    }
    if map[m.base()] != n.base() {
        return Err(Error::BaseNotPreserved(m.base(), map[m.base()]));
    }
    mu.check_in(m.len())?;
    Ok(FreeVector::from_pairs(mu.iter().map(|(x, c)| (map[x], c))))
}

/// Re-indexes `μ` onto the subset `f_idx` (sorted original indices, as
/// returned by [`PointedMetricSpace::restrict`]).
pub fn restriction_projection(mu: &FreeVector, f_idx: &[usize]) -> Result<FreeVector> {
    let mut out = FreeVector::new();
    for (x, c) in mu.iter() {
        match f_idx.binary_search(&x) {
            Ok(k) => out.add_at(k, c),
            Err(_) => return Err(Error::SupportOutsideSubset(x)),
        }
    }
    Ok(out)
}
