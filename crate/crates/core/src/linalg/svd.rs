//! One-sided (Hestenes) Jacobi SVD for complex matrices.
//!
//! The columns of `A` are rotated pairwise until mutually orthogonal, giving
//! `A·V = W` with `V` unitary. Singular values are the column norms of `W`,
//! left singular vectors are the normalized nonzero columns, and the columns
//! of `V` attached to negligible singular values span the null space. This
//! works for any shape and is accurate to a few ulps relative to `σ_max`,
//! which is all the rank and subspace decisions here need.

use alloc::vec::Vec;

use super::matrix::{Matrix, Scalar};
use crate::tol::Tolerances;

const MAX_SWEEPS: usize = 80;

#[derive(Debug, Clone)]
pub struct Svd {
    /// `A·V`, columns mutually orthogonal.
    w: Matrix,
    v: Matrix,
    /// Column norms of `w`, in column order (not sorted).
    sigma: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Svd {
    pub fn new(a: &Matrix) -> Self {
        let mut w = a.clone();
        let n = a.cols();
        let mut v = Matrix::identity(n);
        let eps = f64::EPSILON;

        for _sweep in 0..MAX_SWEEPS {
            let mut rotated = false;
            for i in 0..n {
                for j in (i + 1)..n {
                    let alpha = w.col_norm_sqr(i);
                    let beta = w.col_norm_sqr(j);
                    let gamma = w.col_dot(i, j);
                    let g = gamma.norm();
                    if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    // Rotate the phase of column j so that col_i^* col_j = |γ|,
                    // then apply the real Jacobi rotation.
                    let phase = gamma / g;
                    let zeta = (beta - alpha) / (2.0 * g);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let t = if zeta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    rotate(&mut w, i, j, c, s, phase);
                    rotate(&mut v, i, j, c, s, phase);
                }
            }
            if !rotated {
                break;
            }
        }

        let sigma = (0..n).map(|j| w.col_norm_sqr(j).sqrt()).collect();
        Svd {
            w,
            v,
            sigma,
            rows: a.rows(),
            cols: a.cols(),
        }
    }

    /// Singular values in descending order (length = number of columns).
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s = self.sigma.clone();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest of the `min(rows, cols)` leading singular values.
    pub fn sigma_min(&self) -> f64 {
        let k = self.rows.min(self.cols);
        if k == 0 {
            return 0.0;
        }
        self.singular_values()[k - 1]
    }

    /// Rank cutoff `tol_rank · σ_max · max(rows, cols)`.
    pub fn cutoff(&self, tol: &Tolerances) -> f64 {
        tol.tol_rank * self.sigma_max() * self.rows.max(self.cols) as f64
    }

    fn significant(&self, tol: &Tolerances) -> Vec<usize> {
        let cut = self.cutoff(tol);
        let mut idx: Vec<usize> = (0..self.sigma.len())
            .filter(|&j| self.sigma[j] > cut && self.sigma[j] > 0.0)
            .collect();
        idx.sort_by(|&a, &b| self.sigma[b].partial_cmp(&self.sigma[a]).unwrap());
        idx
    }

    pub fn rank(&self, tol: &Tolerances) -> usize {
        self.significant(tol).len()
    }

    /// Orthonormal basis of the column space (left singular vectors).
    pub fn range_basis(&self, tol: &Tolerances) -> Matrix {
        let idx = self.significant(tol);
        let mut u = self.w.select_columns(&idx);
        for (k, &j) in idx.iter().enumerate() {
            let s = self.sigma[j];
            for r in 0..u.rows() {
                u[(r, k)] /= s;
            }
        }
        u
    }

    /// Orthonormal basis of the null space (right singular vectors with
    /// negligible singular values).
    pub fn kernel_basis(&self, tol: &Tolerances) -> Matrix {
        let cut = self.cutoff(tol);
        let idx: Vec<usize> = (0..self.sigma.len())
            .filter(|&j| !(self.sigma[j] > cut && self.sigma[j] > 0.0))
            .collect();
        self.v.select_columns(&idx)
    }

    /// Moore–Penrose pseudoinverse `Σ v_j w_j^* / σ_j²` over significant `j`.
    pub fn pseudo_inverse(&self, tol: &Tolerances) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for j in self.significant(tol) {
            let s2 = self.sigma[j] * self.sigma[j];
            for r in 0..self.cols {
                let vr = self.v[(r, j)] / s2;
                for c in 0..self.rows {
                    out[(r, c)] += vr * self.w[(c, j)].conj();
                }
            }
        }
        out
    }

    /// Rank factorization `A = F·G` with `F = U_r Σ_r` (n×r) and `G = V_r^*` (r×n).
    pub fn rank_factorization(&self, tol: &Tolerances) -> (Matrix, Matrix) {
        let idx = self.significant(tol);
        let f = self.w.select_columns(&idx);
        let g = self.v.select_columns(&idx).adjoint();
        (f, g)
    }
}

fn rotate(m: &mut Matrix, i: usize, j: usize, c: f64, s: f64, phase: Scalar) {
    let conj_phase = phase.conj();
    for r in 0..m.rows() {
        let xi = m[(r, i)];
        let xj = m[(r, j)] * conj_phase;
        m[(r, i)] = xi * c - xj * s;
        m[(r, j)] = (xi * s + xj * c) * phase;
    }
}

/// Largest singular value; 0 for empty matrices.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    // Jacobi on the thinner side.
    if m.cols() > m.rows() {
        Svd::new(&m.adjoint()).sigma_max()
    } else {
        Svd::new(m).sigma_max()
    }
}

/// Numerical rank with the relative cutoff of [`Svd::cutoff`].
pub fn rank(m: &Matrix, tol: &Tolerances) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    if m.cols() > m.rows() {
        Svd::new(&m.adjoint()).rank(tol)
    } else {
        Svd::new(m).rank(tol)
    }
}
