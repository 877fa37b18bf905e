//! Small numeric helpers: stable log-sum-exp, compensated summation, and a
//! dense solver for the low-dimensional systems that arise in standard-error
//! computation.

/// Stable `ln(sum(exp(x)))` with max-subtraction.
///
/// Returns negative infinity on an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Kahan compensated accumulator. Keeps long likelihood sums accurate to a
/// few ulps independent of length, with a fixed summation order.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Dot product of two equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Invert a small dense matrix (row-major, n x n) by Gauss-Jordan elimination
/// with partial pivoting. Returns `None` when the matrix is numerically
/// singular. Intended for the d x d information matrices of model fits.
pub fn invert_small(matrix: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
                inv.swap(col * n + j, pivot * n + j);
            }
        }
        let diag = a[col * n + col];
        for j in 0..n {
            a[col * n + j] /= diag;
            inv[col * n + j] /= diag;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row * n + col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                a[row * n + j] -= factor * a[col * n + j];
                inv[row * n + j] -= factor * inv[col * n + j];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_matches_naive_in_safe_range() {
        let xs = [0.3_f64, -1.2, 2.5, 0.0];
        let naive: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - naive).abs() < 1e-14);
    }

    #[test]
    fn log_sum_exp_survives_large_arguments() {
        let xs = [1000.0, 1000.0];
        let got = log_sum_exp(&xs);
        assert!((got - (1000.0 + 2.0_f64.ln())).abs() < 1e-10);
    }

    #[test]
    fn log_sum_exp_empty_is_neg_infinity() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn kahan_sums_many_small_terms_exactly() {
        let mut acc = KahanSum::new();
        for _ in 0..1_000_000 {
            acc.add(0.1);
        }
        assert!((acc.value() - 100_000.0).abs() < 1e-8);
    }

    #[test]
    fn invert_small_recovers_identity() {
        let m = [2.0, 1.0, 1.0, 3.0];
        let inv = invert_small(&m, 2).unwrap();
        // m * inv == I
        let prod = [
            m[0] * inv[0] + m[1] * inv[2],
            m[0] * inv[1] + m[1] * inv[3],
            m[2] * inv[0] + m[3] * inv[2],
            m[2] * inv[1] + m[3] * inv[3],
        ];
        assert!((prod[0] - 1.0).abs() < 1e-12);
        assert!(prod[1].abs() < 1e-12);
        assert!(prod[2].abs() < 1e-12);
        assert!((prod[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invert_small_rejects_singular() {
        let m = [1.0, 2.0, 2.0, 4.0];
        assert!(invert_small(&m, 2).is_none());
    }
}
