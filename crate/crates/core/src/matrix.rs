use std::fmt;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense `d x d` matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![T::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = T::one();
        }
        m
    }

    pub fn from_row_major(dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { left: dim * dim, right: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// `u ⊗ v`, the matrix `(u_i v_j)`.
    pub fn outer(u: &[T], v: &[T]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch { left: u.len(), right: v.len() });
        }
        Ok(Self::from_fn(u.len(), |i, j| u[i] * v[j]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.dim + j] = value;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&x, &y)| f(x, y)).collect(),
        }
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetric_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self.get(i, j) + self.get(j, i)).half())
    }

    /// `(M − Mᵀ) / 2`.
    pub fn antisymmetric_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self.get(i, j) - self.get(j, i)).half())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..=i).all(|j| self.get(i, j) == -self.get(j, i)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Entries strictly above the diagonal, row by row.
    pub fn strict_upper(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dim * self.dim.saturating_sub(1) / 2);
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn frobenius_sq(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc + x * x)
    }
}

impl<T: Scalar + Float> SquareMatrix<T> {
    pub fn frobenius(&self) -> T {
        self.frobenius_sq().sqrt()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()))
    }
}

impl<T: fmt::Debug> fmt::Debug for SquareMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.dim.max(1)).collect();
        f.debug_struct("SquareMatrix").field("dim", &self.dim).field("rows", &rows).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_parts_recombine() {
        let m = SquareMatrix::from_row_major(2, vec![1.0, 3.0, -1.0, 2.0]).unwrap();
        let s = m.symmetric_part();
        let a = m.antisymmetric_part();
        assert!(s.is_symmetric());
        assert!(a.is_antisymmetric());
        assert_eq!(s.add(&a), m);
        assert_eq!(a.strict_upper(), vec![2.0]);
    }

    #[test]
    fn outer_rejects_mismatch() {
        assert!(SquareMatrix::outer(&[1.0, 2.0], &[1.0]).is_err());
    }
}
