//! Exact arithmetic over the Gaussian rationals `ℚ(i)`.
//!
//! Used as an identity oracle: ring operations, reduced row echelon form,
//! rank, kernel and inverse are computed without rounding. Norms and SVDs are
//! deliberately absent since they leave the field.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::matrix::{Matrix, Scalar};
use crate::error::{Error, Result};

pub type ExactScalar = Complex<BigRational>;

/// Exact conversion of a finite double to a rational.
pub fn rational_from_f64(x: f64) -> BigRational {
    assert!(x.is_finite());
    if x == 0.0 {
        return BigRational::zero();
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & 0x000f_ffff_ffff_ffff;
    let (mantissa, exp) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | 0x0010_0000_0000_0000, exp_bits - 1075)
    };
    let m = BigInt::from(sign) * BigInt::from(mantissa);
    if exp >= 0 {
        BigRational::from_integer(m << (exp as usize))
    } else {
        BigRational::new(m, BigInt::one() << ((-exp) as usize))
    }
}

pub fn exact_from_complex(z: Scalar) -> ExactScalar {
    Complex::new(rational_from_f64(z.re), rational_from_f64(z.im))
}

pub fn exact_from_ints(re: i64, im: i64) -> ExactScalar {
    Complex::new(
        BigRational::from_integer(re.into()),
        BigRational::from_integer(im.into()),
    )
}

pub fn exact_from_ratio(re: (i64, i64), im: (i64, i64)) -> ExactScalar {
    Complex::new(
        BigRational::new(re.0.into(), re.1.into()),
        BigRational::new(im.0.into(), im.1.into()),
    )
}

pub fn round_to_complex(z: &ExactScalar) -> Scalar {
    Scalar::new(
        z.re.to_f64().unwrap_or(f64::NAN),
        z.im.to_f64().unwrap_or(f64::NAN),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ExactScalar>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            data: (0..rows * cols).map(|_| ExactScalar::zero()).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                ExactScalar::one()
            } else {
                ExactScalar::zero()
            }
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> ExactScalar,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ExactMatrix { rows, cols, data }
    }

    /// Exact image of a floating-point matrix (every finite double is a
    /// dyadic rational).
    pub fn from_matrix(m: &Matrix) -> Self {
        Self::from_fn(m.rows(), m.cols(), |i, j| exact_from_complex(m[(i, j)]))
    }

    /// Entrywise rounding to the nearest doubles.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| round_to_complex(&self[(i, j)]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.is_zero())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])].clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)].clone())
    }

    pub fn one_minus(&self) -> Self {
        &ExactMatrix::identity(self.rows) - self
    }

    pub fn one_plus(&self) -> Self {
        &ExactMatrix::identity(self.rows) + self
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (ExactMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(piv) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, piv);
            let inv = ExactScalar::one() / m[(row, col)].clone();
            for j in col..m.cols {
                let v = m[(row, j)].clone() * inv.clone();
                m[(row, j)] = v;
            }
            for r in 0..m.rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let f = m[(r, col)].clone();
                for j in col..m.cols {
                    let v = m[(r, j)].clone() - f.clone() * m[(row, j)].clone();
                    m[(r, j)] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space, one column per free variable.
    pub fn kernel_basis(&self) -> ExactMatrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = ExactMatrix::zeros(self.cols, free.len());
        for (kc, &f) in free.iter().enumerate() {
            k[(f, kc)] = ExactScalar::one();
            for (pr, &pc) in pivots.iter().enumerate() {
                k[(pc, kc)] = -r[(pr, f)].clone();
            }
        }
        k
    }

    /// Linearly independent columns spanning the column space.
    pub fn column_basis(&self) -> ExactMatrix {
        let (_, pivots) = self.rref();
        self.select_columns(&pivots)
    }

    /// Linearly independent rows spanning the row space.
    pub fn row_basis(&self) -> ExactMatrix {
        let (_, pivots) = self.transpose().rref();
        self.select_rows(&pivots)
    }

    pub fn inverse(&self) -> Result<ExactMatrix> {
        if self.rows != self.cols {
            return Err(Error::Dimension("inverse of a non-square matrix"));
        }
        let n = self.rows;
        let aug = Self::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                ExactScalar::one()
            } else {
                ExactScalar::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::Singular);
        }
        Ok(Self::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
    }

    pub fn is_idempotent(&self) -> bool {
        self.rows == self.cols && &(self * self) == self
    }
}

impl core::ops::Index<(usize, usize)> for ExactMatrix {
    type Output = ExactScalar;
    fn index(&self, (i, j): (usize, usize)) -> &ExactScalar {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for ExactMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ExactScalar {
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Mul<&'a ExactMatrix> for &'a ExactMatrix {
    type Output = ExactMatrix;
    fn mul(self, rhs: &'a ExactMatrix) -> ExactMatrix {
        assert_eq!(self.cols, rhs.rows, "exact product dimension mismatch");
        ExactMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            let mut s = ExactScalar::zero();
            for k in 0..self.cols {
                let x = &self[(i, k)];
                let y = &rhs[(k, j)];
                if x.is_zero() || y.is_zero() {
                    continue;
                }
                s += x.clone() * y.clone();
            }
            s
        })
    }
}

impl<'a> Add<&'a ExactMatrix> for &'a ExactMatrix {
    type Output = ExactMatrix;
    fn add(self, rhs: &'a ExactMatrix) -> ExactMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ExactMatrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + rhs[(i, j)].clone()
        })
    }
}

impl<'a> Sub<&'a ExactMatrix> for &'a ExactMatrix {
    type Output = ExactMatrix;
    fn sub(self, rhs: &'a ExactMatrix) -> ExactMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ExactMatrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - rhs[(i, j)].clone()
        })
    }
}

/// Product of a chain of exact matrices, left to right.
pub fn exact_product(factors: &[&ExactMatrix]) -> ExactMatrix {
    let (first, rest) = factors.split_first().expect("empty product");
    rest.iter().fold((*first).clone(), |acc, m| &acc * m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_matrix(rows: &[&[i64]]) -> ExactMatrix {
        ExactMatrix::from_fn(rows.len(), rows[0].len(), |i, j| {
            exact_from_ints(rows[i][j], 0)
        })
    }

    #[test]
    fn identity_times_m() {
        let m = ExactMatrix::from_fn(2, 2, |i, j| exact_from_ints(i as i64 + 1, j as i64 - 1));
        assert_eq!(&ExactMatrix::identity(2) * &m, m);
    }

    #[test]
    fn unipotent_inverse() {
        let m = int_matrix(&[&[1, 1], &[0, 1]]);
        assert_eq!(m.inverse().unwrap(), int_matrix(&[&[1, -1], &[0, 1]]));
        assert_eq!(
            int_matrix(&[&[1, 2], &[2, 4]]).inverse(),
            Err(Error::Singular)
        );
    }

    #[test]
    fn rank_and_kernel() {
        let m = int_matrix(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let k = m.kernel_basis();
        assert_eq!(k.cols(), 1);
        assert!((&m * &k).is_zero());
        assert_eq!(m.column_basis().cols(), 2);
        assert_eq!(m.row_basis().rows(), 2);
    }

    #[test]
    fn complex_division_exact() {
        let z = exact_from_ints(1, 2);
        let w = exact_from_ints(3, -1);
        assert_eq!((z.clone() / w.clone()) * w, z);
    }

    #[test]
    fn float_round_trip_is_exact() {
        for &x in &[0.1, -3.75, 1e-300, 5e-324, 1.7976931348623157e308, -0.0] {
            let r = rational_from_f64(x);
            assert_eq!(r.to_f64().unwrap(), x);
        }
        let m = Matrix::from_fn(2, 2, |i, j| Scalar::new(0.1 * i as f64, -0.3 * j as f64));
        assert_eq!(ExactMatrix::from_matrix(&m).to_matrix(), m);
    }
}
