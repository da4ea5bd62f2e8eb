//! Dense symmetric matrices and power iteration, sized for the small
//! instances this crate ships (tens of nodes, up to ~1000 players).

use crate::num::Real;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<R> {
    size: usize,
    data: Vec<R>,
}

impl<R: Real> Matrix<R> {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            data: vec![R::zero(); size * size],
        }
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Self {
        let size = rows.len();
        let mut data = Vec::with_capacity(size * size);
        for row in rows {
            assert_eq!(row.len(), size, "matrix must be square");
            data.extend(row);
        }
        Self { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> R {
        self.data[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: R) {
        self.data[i * self.size + j] = value;
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn row_sum(&self, i: usize) -> R {
        self.row(i).iter().copied().sum()
    }

    pub fn is_symmetric(&self, tol: R) -> bool {
        for i in 0..self.size {
            for j in (i + 1)..self.size {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// `out = A v`.
    pub fn mul_vec(&self, v: &[R], out: &mut [R]) {
        debug_assert_eq!(v.len(), self.size);
        debug_assert_eq!(out.len(), self.size);
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = R::zero();
            for (a, x) in row.iter().zip(v) {
                acc += *a * *x;
            }
            *o = acc;
        }
    }
}

/// Largest-magnitude eigenvalue of a symmetric operator given as a
/// mat-vec closure, by power iteration with a deterministic start.
pub fn power_iteration<R: Real>(
    dim: usize,
    iters: usize,
    mut matvec: impl FnMut(&[R], &mut [R]),
) -> R {
    assert!(dim > 0);
    // Slightly uneven start vector avoids starting orthogonal to the
    // leading eigenvector of structured matrices.
    let mut v: Vec<R> = (0..dim)
        .map(|i| R::one() + R::of(1e-3) * R::of((i % 7) as f64))
        .collect();
    let mut w = vec![R::zero(); dim];
    let mut eigen = R::zero();
    for _ in 0..iters {
        matvec(&v, &mut w);
        let norm = w.iter().map(|x| *x * *x).sum::<R>().sqrt();
        if norm == R::zero() {
            return R::zero();
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = *wi / norm;
        }
        eigen = norm;
    }
    // Rayleigh quotient of the final iterate.
    matvec(&v, &mut w);
    let num: R = v.iter().zip(&w).map(|(a, b)| *a * *b).sum();
    let den: R = v.iter().map(|x| *x * *x).sum();
    if den > R::zero() {
        eigen = num / den;
    }
    eigen
}

/// Largest eigenvalue of a symmetric nonnegative matrix.
pub fn spectral_radius<R: Real>(m: &Matrix<R>, iters: usize) -> R {
    power_iteration(m.size(), iters, |v, out| m.mul_vec(v, out))
}
