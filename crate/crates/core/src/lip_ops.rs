//! Extension of Lipschitz functions from a subset `F ∋ 0` to the whole space.
//!
//! Linear extensions are stored as matrices: row `x` gives the weights with
//! which `(Ef)(x)` averages the values of `f` on `F`. Functions on `F` are
//! indexed by position in the sorted subset.

use crate::banach_lab::RadialNet;
use crate::error::{Error, Result};
use crate::free_norm::{lip_norm, LipFunction, NormSolver};
use crate::metric::{BasePolicy, PointedMetricSpace};
use crate::opnorm::{LinearLipMap, NormWitness, Piece};

const ROW_SUM_TOL: f64 = 1e-9;

/// Sorted, deduplicated subset that contains the base.
pub fn normalize_subset(space: &PointedMetricSpace, subset: &[usize]) -> Result<Vec<usize>> {
    let mut idx = subset.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if let Some(&bad) = idx.iter().find(|&&i| i >= space.len()) {
        return Err(Error::IndexOutOfRange { index: bad, len: space.len() });
    }
    if idx.binary_search(&space.base()).is_err() {
        return Err(Error::BaseNotInSubset(space.base()));
    }
    Ok(idx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearExtensionOperator {
    space: PointedMetricSpace,
    subset: Vec<usize>,
    sub: PointedMetricSpace,
    weights: Vec<Vec<f64>>,
}

impl LinearExtensionOperator {
    /// Validates the extension rows on `F` and the unit row sums.
    pub fn new(space: PointedMetricSpace, subset: &[usize], weights: Vec<Vec<f64>>) -> Result<Self> {
        let subset = normalize_subset(&space, subset)?;
        if weights.len() != space.len() {
            return Err(Error::DimensionMismatch { expected: space.len(), got: weights.len() });
        }
        if let Some(r) = weights.iter().find(|r| r.len() != subset.len()) {
            return Err(Error::DimensionMismatch { expected: subset.len(), got: r.len() });
        }
        for (k, &x) in subset.iter().enumerate() {
            let row = &weights[x];
            if row.iter().enumerate().any(|(j, &w)| w != if j == k { 1.0 } else { 0.0 }) {
                return Err(Error::NotAnExtension(format!("row of subset point {x} is not its indicator")));
            }
        }
        if weights.iter().any(|r| r.iter().any(|w| !w.is_finite()) || (r.iter().sum::<f64>() - 1.0).abs() > ROW_SUM_TOL) {
            return Err(Error::NotAnExtension("rows must be finite and sum to 1".into()));
        }
        let (sub, _) = space.restrict(&subset, BasePolicy::Keep)?;
        Ok(Self { space, subset, sub, weights })
    }

    pub fn space(&self) -> &PointedMetricSpace {
        &self.space
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    /// `F` as a pointed space in its own right.
    pub fn subspace(&self) -> &PointedMetricSpace {
        &self.sub
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn apply(&self, f: &LipFunction) -> Result<LipFunction> {
        if f.len() != self.subset.len() {
            return Err(Error::DimensionMismatch { expected: self.subset.len(), got: f.len() });
        }
        let values = self.weights.iter().map(|r| r.iter().zip(f.values()).map(|(w, v)| w * v).sum()).collect();
        Ok(LipFunction::new(values, self.space.base()))
    }

    /// The operator as a map `Lip₀(F) → Lip₀(M)`.
    pub fn as_map(&self) -> LinearLipMap {
        LinearLipMap::new(vec![Piece::Lip(self.sub.clone())], vec![Piece::Lip(self.space.clone())], self.weights.clone())
            .expect("shapes checked at construction")
    }

    /// Exact operator norm: the largest free norm of `(row_x − row_y)/d(x, y)`.
    pub fn norm(&self, solver: NormSolver) -> Result<NormWitness> {
        self.as_map().norm(solver)
    }
}

pub fn extension_operator_norm(e: &LinearExtensionOperator) -> Result<f64> {
    Ok(e.norm(NormSolver::Flow)?.value)
}

/// `(Ef)(x) = min_{y∈F} f(y) + L·d(x, y)` with `L = ‖f‖_Lip`. Nonlinear,
/// norm preserving.
pub fn infconv_extend(space: &PointedMetricSpace, subset: &[usize], f: &LipFunction) -> Result<LipFunction> {
    let subset = normalize_subset(space, subset)?;
    if f.len() != subset.len() {
        return Err(Error::DimensionMismatch { expected: subset.len(), got: f.len() });
    }
    let (sub, _) = space.restrict(&subset, BasePolicy::Keep)?;
    let l = lip_norm(f.values(), &sub);
    let mut values: Vec<f64> = (0..space.len())
        .map(|x| subset.iter().zip(f.values()).map(|(&y, v)| v + l * space.d(x, y)).fold(f64::INFINITY, f64::min))
        .collect();
    for (&y, &v) in subset.iter().zip(f.values()) {
        values[y] = v;
    }
    Ok(LipFunction::new(values, space.base()))
}

fn indicator(len: usize, k: usize) -> Vec<f64> {
    let mut r = vec![0.0; len];
    r[k] = 1.0;
    r
}

/// Each point copies the value at its nearest point of `F`, ties to the
/// lowest index.
pub fn nearest_point_extension(space: &PointedMetricSpace, subset: &[usize]) -> Result<LinearExtensionOperator> {
    let subset = normalize_subset(space, subset)?;
    let weights = (0..space.len())
        .map(|x| {
            let mut best = 0;
            for k in 1..subset.len() {
                if space.d(x, subset[k]) < space.d(x, subset[best]) {
                    best = k;
                }
            }
            indicator(subset.len(), best)
        })
        .collect();
    LinearExtensionOperator::new(space.clone(), &subset, weights)
}

/// Inverse-distance weighting with exponent `s`.
pub fn shepard_extension(space: &PointedMetricSpace, subset: &[usize], s: f64) -> Result<LinearExtensionOperator> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("shepard exponent must be positive, got {s}")));
    }
    let subset = normalize_subset(space, subset)?;
    let weights = (0..space.len())
        .map(|x| match subset.binary_search(&x) {
            Ok(k) => indicator(subset.len(), k),
            Err(_) => {
                let raw: Vec<f64> = subset.iter().map(|&y| space.d(x, y).powf(-s)).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|w| w / total).collect()
            }
        })
        .collect();
    LinearExtensionOperator::new(space.clone(), &subset, weights)
}

/// Extension from whole radius bands of a radial net: linear in the radius
/// between consecutive bands, towards the base below the innermost band and
/// constant beyond the outermost one.
pub fn radial_linear_extension(net: &RadialNet, bands: &[usize]) -> Result<LinearExtensionOperator> {
    let mut bands = bands.to_vec();
    bands.sort_unstable();
    bands.dedup();
    if let Some(&bad) = bands.iter().find(|&&j| j >= net.n_radii()) {
        return Err(Error::IndexOutOfRange { index: bad, len: net.n_radii() });
    }
    let space = net.space();
    let mut subset = vec![space.base()];
    for d in 0..net.n_directions() {
        for &j in &bands {
            subset.push(net.point(d, j));
        }
    }
    subset.sort_unstable();
    let pos = |x: usize| subset.binary_search(&x).expect("band point in subset");
    let radii = net.radii();
    let weights = (0..space.len())
        .map(|x| {
            let mut row = vec![0.0; subset.len()];
            let Some((d, j)) = net.locate(x) else {
                row[pos(x)] = 1.0;
                return row;
            };
            if bands.is_empty() {
                row[pos(space.base())] = 1.0;
                return row;
            }
            let t = radii[j];
            let above = bands.partition_point(|&b| radii[b] < t);
            if above < bands.len() && radii[bands[above]] == t {
                row[pos(x)] = 1.0;
            } else if above == 0 {
                let r2 = radii[bands[0]];
                row[pos(space.base())] = (r2 - t) / r2;
                row[pos(net.point(d, bands[0]))] = t / r2;
            } else if above == bands.len() {
                row[pos(net.point(d, bands[above - 1]))] = 1.0;
            } else {
                let (r1, r2) = (radii[bands[above - 1]], radii[bands[above]]);
                row[pos(net.point(d, bands[above - 1]))] = (r2 - t) / (r2 - r1);
                row[pos(net.point(d, bands[above]))] = (t - r1) / (r2 - r1);
            }
            row
        })
        .collect();
    LinearExtensionOperator::new(space.clone(), &subset, weights)
}
