//! Fixed-size complex square matrices, generic over the real scalar.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquareMatrix<R, const D: usize> {
    data: [[Complex<R>; D]; D],
}

pub type Matrix4<R = f64> = SquareMatrix<R, 4>;
pub type Matrix8<R = f64> = SquareMatrix<R, 8>;

impl<R: Real, const D: usize> SquareMatrix<R, D> {
    pub fn zeros() -> Self {
        Self {
            data: [[Complex::zero(); D]; D],
        }
    }

    pub fn identity() -> Self {
        Self::from_diagonal(Complex::new(R::one(), R::zero()))
    }

    pub fn from_diagonal(value: Complex<R>) -> Self {
        let mut m = Self::zeros();
        for i in 0..D {
            m.data[i][i] = value;
        }
        m
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Complex<R>) -> Self {
        let mut m = Self::zeros();
        for i in 0..D {
            for j in 0..D {
                m.data[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(data: [[Complex<R>; D]; D]) -> Self {
        Self { data }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.data[j][i])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(|i, j| self.data[i][j].conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.data[j][i].conj())
    }

    pub fn scale(&self, s: R) -> Self {
        Self::from_fn(|i, j| self.data[i][j] * s)
    }

    pub fn trace(&self) -> Complex<R> {
        (0..D).fold(Complex::zero(), |acc, i| acc + self.data[i][i])
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flatten()
            .map(|z| z.norm_sqr().value().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn map<S: Real>(&self, f: impl Fn(Complex<R>) -> Complex<S>) -> SquareMatrix<S, D> {
        SquareMatrix::from_fn(|i, j| f(self.data[i][j]))
    }
}

impl<R, const D: usize> Index<(usize, usize)> for SquareMatrix<R, D> {
    type Output = Complex<R>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<R> {
        &self.data[i][j]
    }
}

impl<R, const D: usize> IndexMut<(usize, usize)> for SquareMatrix<R, D> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<R> {
        &mut self.data[i][j]
    }
}

impl<R: Real, const D: usize> Add for SquareMatrix<R, D> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.data[i][j] + rhs.data[i][j])
    }
}

impl<R: Real, const D: usize> Sub for SquareMatrix<R, D> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.data[i][j] - rhs.data[i][j])
    }
}

impl<R: Real, const D: usize> Mul for SquareMatrix<R, D> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..D {
            for k in 0..D {
                let a = self.data[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..D {
                    out.data[i][j] = out.data[i][j] + a * rhs.data[k][j];
                }
            }
        }
        out
    }
}
