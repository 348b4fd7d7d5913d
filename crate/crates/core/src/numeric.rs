//! Small numerical helpers shared by the solvers.

/// Compensated (Neumaier) summation accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut acc = NeumaierSum::new();
    for x in it {
        acc.add(x);
    }
    acc.value()
}

/// Exact power of two.
pub fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// Returns `e` with `2^e <= t < 2^(e+1)` for positive finite `t`, read off the
/// binary exponent so no rounding of `log2` can misplace a boundary.
pub fn floor_log2(t: f64) -> i32 {
    debug_assert!(t > 0.0 && t.is_finite());
    // t = mant * 2^exp with mant in [0.5, 1)
    frexp(t).1 - 1
}

/// Returns `m` with `2^m < t <= 2^(m+1)` (half-open crown convention).
pub fn crown_index(t: f64) -> i32 {
    let e = floor_log2(t);
    if is_power_of_two(t) {
        e - 1
    } else {
        e
    }
}

pub fn is_power_of_two(t: f64) -> bool {
    t > 0.0 && t.is_finite() && frexp(t).0 == 0.5
}

/// Decomposes `x` into `(m, e)` with `x = m * 2^e` and `|m|` in `[0.5, 1)`.
pub fn frexp(x: f64) -> (f64, i32) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    if exp_bits == 0 {
        // subnormal: renormalise
        let (m, e) = frexp(x * pow2(64));
        return (m, e - 64);
    }
    let e = exp_bits - 1022;
    let m_bits = (bits & !(0x7ffu64 << 52)) | (1022u64 << 52);
    (f64::from_bits(m_bits), e)
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `tol`.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= tol {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}
