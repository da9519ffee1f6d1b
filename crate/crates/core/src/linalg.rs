//! Dense symmetric positive-definite solves.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`, stored row-major.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    /// Factors the row-major `n × n` matrix `a`. Only the lower triangle is read.
    pub fn factor(a: &[T], n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch(format!("expected {}×{} matrix, got {} entries", n, n, a.len())));
        }
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let row_j = j * n;
            let lj = &l[row_j..row_j + j];
            let d = a[row_j + j] - dot(lj, lj);
            if !(d > T::zero()) {
                return Err(Error::NumericalFailure(format!("matrix not positive definite at pivot {j}")));
            }
            let d = d.sqrt();
            l[row_j + j] = d;
            for i in (j + 1)..n {
                let row_i = i * n;
                l[row_i + j] = (a[row_i + j] - dot(&l[row_i..row_i + j], &l[row_j..row_j + j])) / d;
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` by forward then backward substitution.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!("rhs has {} entries, system has {}", b.len(), n)));
        }
        let mut y = b.to_vec();
        for i in 0..n {
            let row = i * n;
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[row + k] * y[k];
            }
            y[i] = s / self.l[row + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        Ok(y)
    }
}

/// Inner product with eight independent partial sums, which lets the
/// compiler keep several multiply-adds in flight.
#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [T::zero(); 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = T::zero();
    for (&x, &y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// `y = A x` for a row-major `n × n` matrix.
pub fn sym_matvec<T: Real>(a: &[T], n: usize, x: &[T]) -> Vec<T> {
    (0..n).map(|i| a[i * n..(i + 1) * n].iter().zip(x).map(|(&aij, &xj)| aij * xj).sum()).collect()
}

/// Euclidean norm.
pub fn norm2<T: Real>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum::<T>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        // A = [[4, 2], [2, 3]], b = [2, 1]  =>  x = [0.5, 0].
        let a = [4.0f64, 2.0, 2.0, 3.0];
        let ch = Cholesky::factor(&a, 2).unwrap();
        let x = ch.solve(&[2.0, 1.0]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && x[1].abs() < 1e-15);
    }

    #[test]
    fn residual_is_tiny_on_random_gram() {
        let n = 30;
        let m = 50;
        let p: Vec<f64> = (0..n * m).map(|k| ((k * 7919 % 1000) as f64 / 500.0) - 1.0).collect();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = (0..m).map(|t| p[i * m + t] * p[j * m + t]).sum::<f64>() + if i == j { 0.1 } else { 0.0 };
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = Cholesky::factor(&g, n).unwrap().solve(&b).unwrap();
        let r: Vec<f64> = sym_matvec(&g, n, &x).iter().zip(&b).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) < 1e-8 * norm2(&b));
    }

    #[test]
    fn rejects_indefinite_and_bad_shapes() {
        assert!(matches!(Cholesky::factor(&[1.0, 2.0, 2.0, 1.0], 2), Err(Error::NumericalFailure(_))));
        assert!(matches!(Cholesky::factor(&[1.0, 2.0, 3.0], 2), Err(Error::DimensionMismatch(_))));
        let ch = Cholesky::factor(&[1.0], 1).unwrap();
        assert!(ch.solve(&[1.0, 2.0]).is_err());
    }
}
