use num_traits::Zero;

use super::matrix::{Matrix, Scalar};
use super::svd::Svd;
use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// Inverse of a square matrix.
///
/// Returns [`Error::Singular`] when `σ_min ≤ tol_inv · σ_max`; otherwise the
/// inverse is computed by Gauss–Jordan elimination with partial pivoting.
pub fn try_inverse(m: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::Dimension("inverse of a non-square matrix"));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let svd = Svd::new(m);
    let smax = svd.sigma_max();
    if smax == 0.0 || svd.sigma_min() <= tol.tol_inv * smax {
        return Err(Error::Singular);
    }
    gauss_jordan(m).ok_or(Error::Singular)
}

/// Smallest singular value divided by the largest; 0 for the zero matrix.
pub fn inverse_margin(m: &Matrix) -> f64 {
    if m.rows() == 0 {
        return 1.0;
    }
    let svd = Svd::new(m);
    let smax = svd.sigma_max();
    if smax == 0.0 {
        0.0
    } else {
        svd.sigma_min() / smax
    }
}

fn gauss_jordan(m: &Matrix) -> Option<Matrix> {
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[(x, col)].norm().partial_cmp(&a[(y, col)].norm()).unwrap())?;
        if a[(piv, col)].is_zero() {
            return None;
        }
        if piv != col {
            for j in 0..n {
                let t = a[(col, j)];
                a[(col, j)] = a[(piv, j)];
                a[(piv, j)] = t;
                let t = inv[(col, j)];
                inv[(col, j)] = inv[(piv, j)];
                inv[(piv, j)] = t;
            }
        }
        let d = Scalar::new(1.0, 0.0) / a[(col, col)];
        for j in 0..n {
            a[(col, j)] *= d;
            inv[(col, j)] *= d;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[(i, col)];
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                let x = a[(col, j)];
                a[(i, j)] -= f * x;
                let y = inv[(col, j)];
                inv[(i, j)] -= f * y;
            }
        }
    }
    Some(inv)
}

/// Moore–Penrose pseudoinverse with the `tol_rank` cutoff.
pub fn pseudo_inverse(m: &Matrix, tol: &Tolerances) -> Matrix {
    if m.rows() == 0 || m.cols() == 0 {
        return Matrix::zeros(m.cols(), m.rows());
    }
    Svd::new(m).pseudo_inverse(tol)
}
