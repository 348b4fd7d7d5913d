//! Dense two-phase simplex with Bland's rule.
//!
//! [`maximize`] solves `max c·x  s.t.  A x <= b` with free `x`. The problems in
//! this crate have few variables and many constraints, so the simplex runs on
//! the dual standard form `min b·y  s.t.  Aᵀ y = c, y >= 0`, whose tableau has
//! one row per primal variable. The primal optimum is read off as the simplex
//! multipliers of the optimal basis, which makes it a vertex of `{A x <= b}`.
//! Both solutions are re-solved from the final basis by Gaussian elimination.

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, solve_dense};

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Optimal primal point (a vertex of the feasible polyhedron).
    pub x: Vec<f64>,
    /// Optimal multipliers, one per constraint row.
    pub y: Vec<f64>,
    /// `c·x`.
    pub value: f64,
    /// `b·y`; equals `value` up to rounding.
    pub dual_value: f64,
    pub pivots: usize,
}

impl LpSolution {
    pub fn gap(&self) -> f64 {
        (self.value - self.dual_value).abs()
    }
}

struct Tableau {
    rows: usize,
    width: usize,
    t: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    active: Vec<bool>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, j: usize) -> f64 {
        self.t[r * self.width + j]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.t[r * self.width + self.width - 1]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let p = self.t[pr * w + pc];
        for j in 0..w {
            self.t[pr * w + j] /= p;
        }
        self.t[pr * w + pc] = 1.0;
        let prow: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == pr || !self.active[r] {
                continue;
            }
            let f = self.t[r * w + pc];
            if f != 0.0 {
                let row = &mut self.t[r * w..(r + 1) * w];
                for (x, &pj) in row.iter_mut().zip(&prow) {
                    *x -= f * pj;
                }
                row[pc] = 0.0;
            }
        }
        let f = self.obj[pc];
        if f != 0.0 {
            for (x, &pj) in self.obj.iter_mut().zip(&prow) {
                *x -= f * pj;
            }
            self.obj[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Runs Bland's rule over columns `0..ncols`. Returns `Ok(false)` when the
    /// objective is unbounded below.
    fn optimize(&mut self, ncols: usize, rc_tol: f64, piv_tol: f64, pivots: &mut usize, limit: usize) -> Result<bool> {
        loop {
            let Some(pc) = (0..ncols).find(|&j| self.obj[j] < -rc_tol) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                if !self.active[r] {
                    continue;
                }
                let a = self.at(r, pc);
                if a > piv_tol {
                    let ratio = self.rhs(r).max(0.0) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            let tie = (ratio - bratio).abs() <= 1e-12 * bratio.abs().max(1e-300);
                            if ratio < bratio && !tie || tie && self.basis[r] < self.basis[br] {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, _)) = best else {
                return Ok(false);
            };
            self.pivot(pr, pc);
            *pivots += 1;
            if *pivots > limit {
                return Err(Error::LpIterationLimit(*pivots));
            }
        }
    }
}

fn max_violation(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(row, &bi)| row.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() - bi)
        .fold(0.0, f64::max)
}

/// Maximises `c·x` over `{x : A x <= b}`.
///
/// Errors: [`Error::LpInfeasible`] when the feasible set is empty and
/// [`Error::LpUnbounded`] when the objective is unbounded. If the dual is
/// infeasible the primal is reported unbounded when `x = 0` is feasible and
/// infeasible otherwise.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: b.len() });
    }
    if let Some(row) = a.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: row.len() });
    }
    let bscale = b.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    let cscale = c.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let origin_feasible = b.iter().all(|&v| v >= -1e-12 * bscale);
    if n == 0 {
        return if origin_feasible {
            Ok(LpSolution { x: vec![], y: vec![0.0; m], value: 0.0, dual_value: 0.0, pivots: 0 })
        } else {
            Err(Error::LpInfeasible)
        };
    }

    let width = m + n + 1;
    let mut tab = Tableau {
        rows: n,
        width,
        t: vec![0.0; n * width],
        obj: vec![0.0; width],
        basis: (m..m + n).collect(),
        active: vec![true; n],
    };
    let sign: Vec<f64> = c.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    for r in 0..n {
        for (j, row) in a.iter().enumerate() {
            tab.t[r * width + j] = sign[r] * row[r];
        }
        tab.t[r * width + m + r] = 1.0;
        tab.t[r * width + width - 1] = sign[r] * c[r];
    }
    // phase 1: minimise the sum of artificials
    for j in 0..width {
        if j >= m && j < m + n {
            continue;
        }
        tab.obj[j] = -(0..n).map(|r| tab.at(r, j)).sum::<f64>();
    }
    let piv_tol = 1e-11;
    let limit = 50_000 + 50 * (m + n);
    let mut pivots = 0;
    let feas_tol = 1e-9 * cscale.max(1.0);
    tab.optimize(m, 1e-12 * cscale.max(1.0), piv_tol, &mut pivots, limit)?;
    if -tab.obj[width - 1] > feas_tol {
        return Err(if origin_feasible { Error::LpUnbounded } else { Error::LpInfeasible });
    }
    // drive remaining artificials out of the basis
    for r in 0..n {
        if tab.basis[r] < m {
            continue;
        }
        let col = (0..m)
            .filter(|&j| tab.at(r, j).abs() > 1e-9)
            .max_by(|&i, &j| tab.at(r, i).abs().total_cmp(&tab.at(r, j).abs()).then(j.cmp(&i)));
        match col {
            Some(j) => {
                tab.pivot(r, j);
                pivots += 1;
            }
            None => tab.active[r] = false,
        }
    }
    // phase 2
    let cost = |j: usize| if j < m { b[j] } else { 0.0 };
    for j in 0..width - 1 {
        let mut s = cost(j);
        for r in 0..n {
            if tab.active[r] {
                s -= cost(tab.basis[r]) * tab.at(r, j);
            }
        }
        tab.obj[j] = s;
    }
    tab.obj[width - 1] = -(0..n).filter(|&r| tab.active[r]).map(|r| cost(tab.basis[r]) * tab.rhs(r)).sum::<f64>();
    for r in 0..n {
        if tab.active[r] {
            let bj = tab.basis[r];
            tab.obj[bj] = 0.0;
        }
    }
    if !tab.optimize(m, 1e-11 * bscale, piv_tol, &mut pivots, limit)? {
        return Err(Error::LpInfeasible);
    }

    // read off both solutions
    let mut x: Vec<f64> = (0..n).map(|r| -sign[r] * tab.obj[m + r]).collect();
    let mut y = vec![0.0; m];
    for r in 0..n {
        if tab.active[r] {
            y[tab.basis[r]] = tab.rhs(r).max(0.0);
        }
    }
    for r in 0..n {
        if !tab.active[r] {
            x[r] = 0.0;
        }
    }
    // polish on the optimal basis
    let rows: Vec<usize> = (0..n).filter(|&r| tab.active[r]).collect();
    let cols: Vec<usize> = rows.iter().map(|&r| tab.basis[r]).collect();
    let k = rows.len();
    let bmat: Vec<Vec<f64>> = cols.iter().map(|&j| rows.iter().map(|&r| a[j][r]).collect()).collect();
    if let Some(xs) = solve_dense(bmat.clone(), cols.iter().map(|&j| b[j]).collect(), 1e-13) {
        let mut cand = vec![0.0; n];
        for (i, &r) in rows.iter().enumerate() {
            cand[r] = xs[i];
        }
        if max_violation(a, b, &cand) <= max_violation(a, b, &x).max(1e-12 * bscale) {
            x = cand;
        }
    }
    let bt: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|l| bmat[l][i]).collect()).collect();
    if let Some(ys) = solve_dense(bt, rows.iter().map(|&r| c[r]).collect(), 1e-13) {
        if ys.iter().all(|&v| v >= -1e-9) {
            y = vec![0.0; m];
            for (i, &j) in cols.iter().enumerate() {
                y[j] = ys[i].max(0.0);
            }
        }
    }
    let value = compensated_sum(c.iter().zip(&x).map(|(p, q)| p * q));
    let dual_value = compensated_sum(b.iter().zip(&y).map(|(p, q)| p * q));
    Ok(LpSolution { x, y, value, dual_value, pivots })
}
