//! Brute-force reference computations, written independently of the library
//! solvers. Only suitable for tiny instances.
#![allow(dead_code)]

use freelip_core::PointedMetricSpace;

/// Solves a square system by Gauss–Jordan elimination with full row scan.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in col..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in 0..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(m: usize, k: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, start: usize) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..m {
        cur.push(i);
        combinations(m, k, out, cur, i + 1);
        cur.pop();
    }
}

/// `max c·x` over the bounded polyhedron `{A x <= b}` by enumerating every
/// vertex (every nonsingular choice of `dim` active constraints).
pub fn vertex_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> f64 {
    let d = c.len();
    if d == 0 {
        return 0.0;
    }
    let mut subsets = Vec::new();
    combinations(a.len(), d, &mut subsets, &mut Vec::new(), 0);
    let mut best = f64::NEG_INFINITY;
    for s in subsets {
        let m: Vec<Vec<f64>> = s.iter().map(|&i| a[i].clone()).collect();
        let rhs: Vec<f64> = s.iter().map(|&i| b[i]).collect();
        if let Some(x) = solve(m, rhs) {
            let feasible = a
                .iter()
                .zip(b)
                .all(|(row, &bi)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= bi + 1e-9);
            if feasible {
                best = best.max(c.iter().zip(&x).map(|(p, q)| p * q).sum());
            }
        }
    }
    best
}

/// Largest pairing of `coeffs` (dense, per point) with a 1-Lipschitz function
/// vanishing at the base.
pub fn brute_free_norm(space: &PointedMetricSpace, coeffs: &[f64]) -> f64 {
    let n = space.len();
    let others: Vec<usize> = (0..n).filter(|&x| x != space.base()).collect();
    let pos = |x: usize| others.iter().position(|&y| y == x);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let mut row = vec![0.0; others.len()];
            if let Some(k) = pos(u) {
                row[k] += 1.0;
            }
            if let Some(k) = pos(v) {
                row[k] -= 1.0;
            }
            a.push(row);
            b.push(space.d(u, v));
        }
    }
    let c: Vec<f64> = others.iter().map(|&x| coeffs[x]).collect();
    vertex_max(&c, &a, &b)
}

/// Quotient distances by listing every simple path and charging nothing for
/// steps inside a class.
pub fn path_enumeration_quotient(space: &PointedMetricSpace, labels: &[usize]) -> Vec<Vec<f64>> {
    let n = space.len();
    let mut out = vec![vec![f64::INFINITY; n]; n];
    fn walk(
        space: &PointedMetricSpace,
        labels: &[usize],
        path: &mut Vec<usize>,
        used: &mut Vec<bool>,
        len: f64,
        row: &mut Vec<f64>,
    ) {
        let last = *path.last().unwrap();
        if len < row[last] {
            row[last] = len;
        }
        for next in 0..space.len() {
            if used[next] {
                continue;
            }
            let step = if labels[next] == labels[last] { 0.0 } else { space.d(last, next) };
            used[next] = true;
            path.push(next);
            walk(space, labels, path, used, len + step, row);
            path.pop();
            used[next] = false;
        }
    }
    for x in 0..n {
        let mut used = vec![false; n];
        used[x] = true;
        walk(space, labels, &mut vec![x], &mut used, 0.0, &mut out[x]);
    }
    out
}
