//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals. Row `i` reads
/// `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1]`; `lower[0]` and
/// `upper[n−1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn with_size(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.upper[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Max-norm of `A x − rhs`.
    pub fn residual(&self, x: &[f64], rhs: &[f64]) -> f64 {
        self.mul(x)
            .iter()
            .zip(rhs)
            .fold(0.0, |m, (ax, b)| f64::max(m, (ax - b).abs()))
    }

    /// Solves `A x = rhs` without pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        assert_eq!(rhs.len(), n, "rhs length must match the matrix size");
        let scale = self
            .diag
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let tiny = scale * 1e-14;

        let mut c = vec![0.0; n];
        let mut g = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot.abs() <= tiny {
            return Err(Error::SingularSystem { row: 0 });
        }
        c[0] = self.upper[0] / pivot;
        g[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i] * c[i - 1];
            if pivot.abs() <= tiny {
                return Err(Error::SingularSystem { row: i });
            }
            c[i] = if i + 1 < n {
                self.upper[i] / pivot
            } else {
                0.0
            };
            g[i] = (rhs[i] - self.lower[i] * g[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            g[i] -= c[i] * g[i + 1];
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let m = Tridiagonal {
            lower: vec![0.0, 1.0, 1.0, 1.0],
            diag: vec![4.0, 4.0, 4.0, 4.0],
            upper: vec![1.0, 1.0, 1.0, 0.0],
        };
        let x_true = [1.0, -2.0, 3.0, 0.5];
        let rhs = m.mul(&x_true);
        let x = m.solve(&rhs).unwrap();
        for (a, b) in x.iter().zip(x_true) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(m.residual(&x, &rhs) < 1e-14);
    }

    #[test]
    fn detects_zero_pivot() {
        let m = Tridiagonal {
            lower: vec![0.0, 1.0],
            diag: vec![1.0, 1.0],
            upper: vec![1.0, 0.0],
        };
        assert!(matches!(
            m.solve(&[1.0, 1.0]),
            Err(Error::SingularSystem { row: 1 })
        ));
    }
}
