//! Exact norms of linear maps between finite ℓ∞-sums of `Lip₀` spaces and
//! copies of ℝ.
//!
//! A map is a matrix whose columns are the coordinates of the domain (point
//! values of each `Lip₀` piece, then one column per scalar piece) and whose
//! rows are those of the codomain. On a `Lip₀(N)` codomain piece the norm is
//!
//! `max_{x≠y} Σ_P ‖(row_x − row_y)|_P‖_* / d_N(x, y)`
//!
//! where the dual norm of a `Lip₀` domain piece is the free norm of the
//! coefficient vector on that piece and the dual norm of a scalar is its
//! absolute value. A scalar codomain row contributes `Σ_P ‖row|_P‖_*`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free_norm::{free_norm, FreeVector, NormSolver};
use crate::metric::PointedMetricSpace;

#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    Lip(PointedMetricSpace),
    Scalar,
}

impl Piece {
    pub fn dim(&self) -> usize {
        match self {
            Piece::Lip(s) => s.len(),
            Piece::Scalar => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearLipMap {
    domain: Vec<Piece>,
    codomain: Vec<Piece>,
    matrix: Vec<Vec<f64>>,
}

/// Where the norm is attained: codomain piece and the pair of points (the
/// second entry equals the first for scalar pieces).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormWitness {
    pub value: f64,
    pub piece: usize,
    pub pair: (usize, usize),
}

fn offsets(pieces: &[Piece]) -> Vec<usize> {
    let mut out = Vec::with_capacity(pieces.len() + 1);
    let mut acc = 0;
    out.push(0);
    for p in pieces {
        acc += p.dim();
        out.push(acc);
    }
    out
}

impl LinearLipMap {
    pub fn new(domain: Vec<Piece>, codomain: Vec<Piece>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        let cols: usize = domain.iter().map(Piece::dim).sum();
        let rows: usize = codomain.iter().map(Piece::dim).sum();
        if matrix.len() != rows {
            return Err(Error::DimensionMismatch { expected: rows, got: matrix.len() });
        }
        if let Some(r) = matrix.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
        }
        Ok(Self { domain, codomain, matrix })
    }

    /// Zero matrix of the right shape, to be filled with [`Self::set`].
    pub fn zeros(domain: Vec<Piece>, codomain: Vec<Piece>) -> Self {
        let cols: usize = domain.iter().map(Piece::dim).sum();
        let rows: usize = codomain.iter().map(Piece::dim).sum();
        Self { domain, codomain, matrix: vec![vec![0.0; cols]; rows] }
    }

    /// Sets the entry for codomain piece `cp` coordinate `i` and domain piece
    /// `dp` coordinate `j`.
    pub fn set(&mut self, cp: usize, i: usize, dp: usize, j: usize, v: f64) {
        let r = offsets(&self.codomain)[cp] + i;
        let c = offsets(&self.domain)[dp] + j;
        self.matrix[r][c] = v;
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// Applies the map to a domain vector (concatenated piece coordinates).
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    fn dual_norm(&self, coeffs: &[f64], solver: NormSolver) -> Result<f64> {
        let off = offsets(&self.domain);
        let mut total = 0.0;
        for (p, piece) in self.domain.iter().enumerate() {
            let part = &coeffs[off[p]..off[p + 1]];
            total += match piece {
                Piece::Scalar => part[0].abs(),
                Piece::Lip(space) => {
                    let mu = FreeVector::from_dense(part).canonical(space.base());
                    if mu.is_zero() {
                        0.0
                    } else {
                        free_norm(&mu, space, solver)?
                    }
                }
            };
        }
        Ok(total)
    }

    /// Exact operator norm together with the codomain pair attaining it.
    pub fn norm(&self, solver: NormSolver) -> Result<NormWitness> {
        let off = offsets(&self.codomain);
        let mut jobs: Vec<(usize, usize, usize)> = Vec::new();
        for (p, piece) in self.codomain.iter().enumerate() {
            match piece {
                Piece::Scalar => jobs.push((p, 0, 0)),
                Piece::Lip(s) => {
                    for x in 0..s.len() {
                        for y in x + 1..s.len() {
                            jobs.push((p, x, y));
                        }
                    }
                }
            }
        }
        let values: Vec<Result<f64>> = jobs
            .par_iter()
            .map(|&(p, x, y)| {
                let rx = &self.matrix[off[p] + x];
                match &self.codomain[p] {
                    Piece::Scalar => self.dual_norm(rx, solver),
                    Piece::Lip(s) => {
                        let ry = &self.matrix[off[p] + y];
                        let diff: Vec<f64> = rx.iter().zip(ry).map(|(a, b)| a - b).collect();
                        Ok(self.dual_norm(&diff, solver)? / s.d(x, y))
                    }
                }
            })
            .collect();
        let mut best = NormWitness { value: 0.0, piece: 0, pair: (0, 0) };
        for (&(p, x, y), v) in jobs.iter().zip(values) {
            let v = v?;
            if v > best.value {
                best = NormWitness { value: v, piece: p, pair: (x, y) };
            }
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> PointedMetricSpace {
        PointedMetricSpace::from_rows(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]], 0).unwrap()
    }

    #[test]
    fn identity_has_norm_one() {
        let s = chain();
        let mut m = LinearLipMap::zeros(vec![Piece::Lip(s.clone())], vec![Piece::Lip(s)]);
        for i in 0..3 {
            m.set(0, i, 0, i, 1.0);
        }
        assert!((m.norm(NormSolver::Lp).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evaluation_functional() {
        // f ↦ f(2) has norm d(2, 0) = 2
        let s = chain();
        let mut m = LinearLipMap::zeros(vec![Piece::Lip(s)], vec![Piece::Scalar]);
        m.set(0, 0, 0, 2, 1.0);
        assert_eq!(m.norm(NormSolver::Flow).unwrap().value, 2.0);
    }

    #[test]
    fn sum_of_two_pieces() {
        // (f, r) ↦ f + r·d(·,0) on the chain: norm 2
        let s = chain();
        let mut m = LinearLipMap::zeros(vec![Piece::Lip(s.clone()), Piece::Scalar], vec![Piece::Lip(s.clone())]);
        for i in 0..3 {
            m.set(0, i, 0, i, 1.0);
            m.set(0, i, 1, 0, s.radius(i));
        }
        assert!((m.norm(NormSolver::Flow).unwrap().value - 2.0).abs() < 1e-12);
    }
}
