//! Subspaces of `ℂⁿ` and the gap function.
//!
//! In `M_n(ℂ)` the right ideal `x·M_n(ℂ)` is exactly the set of matrices
//! whose columns lie in `col(x)`, and `{m : x·m = 0}` is the set whose columns
//! lie in `null(x)`. Every right ideal and right annihilator is therefore
//! represented here by a [`Subspace`] holding an orthonormal basis.
//!
//! With the spectral norm, the one-sided gap between two such ideals reduces
//! to `δ(M, N) = ‖(1 - P_N)·P_M‖₂` with `P` the orthogonal projectors, and
//! `δ({0}, N) = 0`.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Scalar, Svd};
use crate::tol::Tolerances;

/// Subspace of `ℂⁿ` stored as an `n × k` matrix with orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapResult {
    pub delta_mn: f64,
    pub delta_nm: f64,
    pub gap: f64,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Subspace {
            basis: Matrix::zeros(n, 0),
        }
    }

    pub fn full(n: usize) -> Self {
        Subspace {
            basis: Matrix::identity(n),
        }
    }

    /// Wraps a basis that is already orthonormal. Callers are trusted; use
    /// [`Subspace::span`] for arbitrary spanning sets.
    pub fn from_orthonormal(basis: Matrix) -> Self {
        Subspace { basis }
    }

    /// Span of the columns of `m`.
    pub fn span(m: &Matrix, tol: &Tolerances) -> Self {
        range_of(m, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Orthogonal projector `B·B^*`.
    pub fn projector_matrix(&self) -> Matrix {
        &self.basis * &self.basis.adjoint()
    }

    pub fn orthogonal_complement(&self, tol: &Tolerances) -> Subspace {
        let n = self.ambient_dim();
        let _ = tol;
        if self.dim() == 0 {
            return Subspace::full(n);
        }
        Subspace {
            basis: complete(&self.basis),
        }
    }

    /// Residual of the orthonormality invariant, `‖B^*B - 1‖₂`.
    pub fn orthonormality_residual(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        (&(&self.basis.adjoint() * &self.basis) - &Matrix::identity(self.dim())).spectral_norm()
    }
}

fn check_ambient(m: &Subspace, n: &Subspace) -> Result<()> {
    if m.ambient_dim() != n.ambient_dim() {
        return Err(Error::MismatchedAmbient(m.ambient_dim(), n.ambient_dim()));
    }
    Ok(())
}

/// Orthonormal basis of the column space.
pub fn range_of(m: &Matrix, tol: &Tolerances) -> Subspace {
    if m.cols() == 0 || m.rows() == 0 {
        return Subspace::zero(m.rows());
    }
    Subspace {
        basis: Svd::new(m).range_basis(tol),
    }
}

/// [`range_of`] for a matrix whose natural size is `scale`: when
/// `‖m‖ ≤ tol_rank·max(rows, cols)·scale` the matrix is rounding noise (for
/// example `1 − p` with `p` of full rank) and its range is `{0}`.
pub fn range_of_scaled(m: &Matrix, scale: f64, tol: &Tolerances) -> Subspace {
    if is_noise(m, scale, tol) {
        return Subspace::zero(m.rows());
    }
    range_of(m, tol)
}

/// [`kernel_of`] with the same noise floor as [`range_of_scaled`].
pub fn kernel_of_scaled(m: &Matrix, scale: f64, tol: &Tolerances) -> Subspace {
    if is_noise(m, scale, tol) {
        return Subspace::full(m.cols());
    }
    kernel_of(m, tol)
}

fn is_noise(m: &Matrix, scale: f64, tol: &Tolerances) -> bool {
    m.spectral_norm() <= tol.tol_rank * m.rows().max(m.cols()) as f64 * scale
}

/// Orthonormal basis of the null space, as the orthogonal complement of the
/// row space.
pub fn kernel_of(m: &Matrix, tol: &Tolerances) -> Subspace {
    if m.cols() == 0 {
        return Subspace::zero(0);
    }
    range_of(&m.adjoint(), tol).orthogonal_complement(tol)
}

/// Orthonormal columns spanning the complement of `col(b)`, for `b` with
/// orthonormal columns. Greedy Gram–Schmidt over the standard basis, taking
/// at each step the unit vector with the largest residual.
fn complete(b: &Matrix) -> Matrix {
    let n = b.rows();
    let need = n - b.cols().min(n);
    let mut basis = b.clone();
    let mut out = Matrix::zeros(n, need);
    let mut used = alloc::vec![false; n];
    for k in 0..need {
        let mut best: Option<(usize, Matrix, f64)> = None;
        for e in 0..n {
            if used[e] {
                continue;
            }
            let mut x = Matrix::zeros(n, 1);
            x[(e, 0)] = Scalar::new(1.0, 0.0);
            for _pass in 0..2 {
                let coef = &basis.adjoint() * &x;
                x = &x - &(&basis * &coef);
            }
            let nrm = x.frobenius_norm();
            if best.as_ref().is_none_or(|b| nrm > b.2) {
                best = Some((e, x, nrm));
            }
        }
        let (e, x, nrm) = best.expect("complement larger than ambient space");
        used[e] = true;
        let x = x.scale_real(1.0 / nrm);
        out.set_col(k, x.data());
        basis = basis.hstack(&x);
    }
    out
}

/// One-sided gap `δ(M, N) = sup_{x∈M, ‖x‖=1} dist(x, N)`, clamped to `[0, 1]`.
pub fn one_sided_gap(m: &Subspace, n: &Subspace) -> Result<f64> {
    check_ambient(m, n)?;
    if m.dim() == 0 {
        return Ok(0.0);
    }
    if n.dim() == 0 {
        return Ok(1.0);
    }
    let bm = m.basis();
    let bn = n.basis();
    let resid = bm - &(bn * &(&bn.adjoint() * bm));
    Ok(resid.spectral_norm().min(1.0))
}

pub fn gap(m: &Subspace, n: &Subspace) -> Result<GapResult> {
    let delta_mn = one_sided_gap(m, n)?;
    let delta_nm = one_sided_gap(n, m)?;
    Ok(GapResult {
        delta_mn,
        delta_nm,
        gap: delta_mn.max(delta_nm),
    })
}

/// `M ∩ N = {0}`, decided by `rank([B_M | B_N]) = dim M + dim N`.
pub fn intersection_trivial(m: &Subspace, n: &Subspace, tol: &Tolerances) -> Result<bool> {
    check_ambient(m, n)?;
    let k = m.dim() + n.dim();
    if m.dim() == 0 || n.dim() == 0 {
        return Ok(true);
    }
    if k > m.ambient_dim() {
        return Ok(false);
    }
    let stacked = m.basis().hstack(n.basis());
    Ok(Svd::new(&stacked).rank(tol) == k)
}

/// `M ∔ N = ℂⁿ`.
pub fn direct_sum_is_all(m: &Subspace, n: &Subspace, tol: &Tolerances) -> Result<bool> {
    check_ambient(m, n)?;
    Ok(m.dim() + n.dim() == m.ambient_dim() && intersection_trivial(m, n, tol)?)
}

/// Image `m·S`, i.e. the column space of `m·B_S`.
pub fn map_subspace(m: &Matrix, s: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    if m.cols() != s.ambient_dim() {
        return Err(Error::Dimension(
            "map_subspace: matrix width differs from ambient dimension",
        ));
    }
    Ok(range_of(&(m * s.basis()), tol))
}

/// `small ⊆ big` up to the subspace threshold.
pub fn contains(big: &Subspace, small: &Subspace, tol: &Tolerances) -> Result<bool> {
    Ok(one_sided_gap(small, big)? <= tol.subspace_threshold())
}

/// Equality as `δ̂(M, N) ≤ 10·tol_eq`.
pub fn equals(m: &Subspace, n: &Subspace, tol: &Tolerances) -> Result<bool> {
    Ok(m.dim() == n.dim() && gap(m, n)?.gap <= tol.subspace_threshold())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianStream;

    fn e(n: usize, i: usize) -> Matrix {
        Matrix::from_fn(n, 1, |r, _| {
            Scalar::new(if r == i { 1.0 } else { 0.0 }, 0.0)
        })
    }

    fn line(v: &[f64]) -> Subspace {
        let m = Matrix::from_fn(v.len(), 1, |i, _| Scalar::new(v[i], 0.0));
        range_of(&m, &Tolerances::default())
    }

    #[test]
    fn range_examples() {
        let tol = Tolerances::default();
        let r = range_of(&Matrix::from_real_diag(&[1.0, 2.0, 0.0]), &tol);
        assert_eq!(r.dim(), 2);
        assert!(equals(&r, &range_of(&e(3, 0).hstack(&e(3, 1)), &tol), &tol).unwrap());
        assert_eq!(range_of(&Matrix::zeros(3, 3), &tol).dim(), 0);

        let mut g = GaussianStream::new(8, 0);
        let m = g.matrix(4, 4);
        let s = range_of(&m, &tol);
        let resid = &m - &(&s.projector_matrix() * &m);
        assert!(resid.spectral_norm() < 1e-12);
    }

    #[test]
    fn kernel_examples() {
        let tol = Tolerances::default();
        let k = kernel_of(&Matrix::from_real_diag(&[1.0, 2.0, 0.0]), &tol);
        assert_eq!(k.dim(), 1);
        assert!(equals(&k, &line(&[0.0, 0.0, 1.0]), &tol).unwrap());
        assert_eq!(kernel_of(&Matrix::identity(3), &tol).dim(), 0);

        let mut g = GaussianStream::new(8, 1);
        let m = g.with_rank(4, 2, 5.0);
        let k = kernel_of(&m, &tol);
        assert_eq!(k.dim(), 2);
        assert!((&m * k.basis()).spectral_norm() < 1e-13);
        assert!(k.orthonormality_residual() < 1e-14);

        let w = g.matrix(2, 5);
        let k = kernel_of(&w, &tol);
        assert_eq!(k.dim(), 3);
        assert!((&w * k.basis()).max_abs() < 1e-14);
    }

    #[test]
    fn gap_examples() {
        let a = line(&[1.0, 0.0]);
        let b = line(&[0.0, 1.0]);
        assert_eq!(gap(&a, &a).unwrap().gap, 0.0);
        assert!((gap(&a, &b).unwrap().gap - 1.0).abs() < 1e-15);
        let th = core::f64::consts::PI / 6.0;
        let c = line(&[th.cos(), th.sin()]);
        let g = gap(&a, &c).unwrap();
        assert!((g.delta_mn - 0.5).abs() < 1e-14);
        assert!((g.delta_nm - 0.5).abs() < 1e-14);
        assert_eq!(one_sided_gap(&Subspace::zero(2), &b).unwrap(), 0.0);
        assert!(matches!(
            gap(&a, &Subspace::zero(3)),
            Err(Error::MismatchedAmbient(2, 3))
        ));
    }

    #[test]
    fn intersection_examples() {
        let tol = Tolerances::default();
        let e1 = line(&[1.0, 0.0]);
        let e2 = line(&[0.0, 1.0]);
        assert!(intersection_trivial(&e1, &e2, &tol).unwrap());
        assert!(!intersection_trivial(&e1, &e1, &tol).unwrap());
        // two distinct lines in ℂ², however close, meet trivially
        assert!(intersection_trivial(&e1, &line(&[1.0, 1e-3]), &tol).unwrap());
    }

    #[test]
    fn direct_sum_examples() {
        let tol = Tolerances::default();
        let e12 = range_of(&Matrix::from_real_diag(&[1.0, 1.0, 0.0]), &tol);
        let e3 = line(&[0.0, 0.0, 1.0]);
        assert!(direct_sum_is_all(&e12, &e3, &tol).unwrap());
        assert!(
            !direct_sum_is_all(&line(&[1.0, 0.0, 0.0]), &line(&[0.0, 1.0, 0.0]), &tol).unwrap()
        );
    }

    #[test]
    fn map_examples() {
        let tol = Tolerances::default();
        let e12 = range_of(&Matrix::from_real_diag(&[1.0, 1.0, 0.0]), &tol);
        let d = Matrix::from_real_diag(&[1.0, 2.0, 0.0]);
        assert!(equals(
            &map_subspace(&Matrix::identity(3), &e12, &tol).unwrap(),
            &e12,
            &tol
        )
        .unwrap());
        assert!(equals(&map_subspace(&d, &e12, &tol).unwrap(), &e12, &tol).unwrap());
        assert_eq!(
            map_subspace(&d, &line(&[0.0, 0.0, 1.0]), &tol)
                .unwrap()
                .dim(),
            0
        );
    }

    #[test]
    fn noise_floor() {
        let tol = Tolerances::default();
        let noise = Matrix::from_real_diag(&[1e-17, -2e-17]);
        assert_eq!(range_of(&noise, &tol).dim(), 2);
        assert_eq!(range_of_scaled(&noise, 1.0, &tol).dim(), 0);
        assert_eq!(kernel_of_scaled(&noise, 1.0, &tol).dim(), 2);
        assert_eq!(range_of_scaled(&noise, 1e-17, &tol).dim(), 2);
    }

    #[test]
    fn complement() {
        let tol = Tolerances::default();
        let mut g = GaussianStream::new(1, 1);
        let s = range_of(&g.matrix(5, 2), &tol);
        let c = s.orthogonal_complement(&tol);
        assert_eq!(c.dim(), 3);
        assert!((&s.basis().adjoint() * c.basis()).max_abs() < 1e-13);
        assert!(direct_sum_is_all(&s, &c, &tol).unwrap());
    }
}
