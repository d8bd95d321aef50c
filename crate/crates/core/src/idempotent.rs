//! Idempotents (oblique projectors) with cached range and kernel.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{try_inverse, Matrix};
use crate::rng::GaussianStream;
use crate::subspace::{direct_sum_is_all, kernel_of, range_of, Subspace};
use crate::tol::Tolerances;

#[derive(Clone, Debug)]
pub struct Idempotent {
    m: Matrix,
    range: Subspace,
    kernel: Subspace,
}

impl Idempotent {
    /// Validates `‖m² − m‖ ≤ tol_eq·(1 + ‖m‖²)` and caches range and kernel.
    pub fn new(m: Matrix, tol: &Tolerances) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension("idempotent must be square"));
        }
        let resid = idempotency_residual(&m);
        let nrm = m.spectral_norm();
        if resid > tol.tol_eq * (1.0 + nrm * nrm) {
            return Err(Error::NotIdempotent(resid));
        }
        let range = range_of(&m, tol);
        let kernel = kernel_of(&m, tol);
        if !direct_sum_is_all(&range, &kernel, tol)? {
            return Err(Error::NotComplementary);
        }
        Ok(Idempotent { m, range, kernel })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }

    pub fn range(&self) -> &Subspace {
        &self.range
    }

    pub fn kernel(&self) -> &Subspace {
        &self.kernel
    }

    pub fn rank(&self) -> usize {
        self.range.dim()
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    /// `1 − p`: same pair of subspaces with the roles swapped.
    pub fn complement(&self) -> Idempotent {
        Idempotent {
            m: self.m.one_minus(),
            range: self.kernel.clone(),
            kernel: self.range.clone(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.m.spectral_norm()
    }
}

pub fn idempotency_residual(m: &Matrix) -> f64 {
    (&(m * m) - m).spectral_norm()
}

/// Hermitian projector onto `t`.
pub fn projector(t: &Subspace) -> Idempotent {
    Idempotent {
        m: t.projector_matrix(),
        range: t.clone(),
        kernel: t.orthogonal_complement(&Tolerances::default()),
    }
}

/// Idempotent with range `t` and kernel `s`:
/// `[B_t | B_s] · diag(1, 0) · [B_t | B_s]⁻¹`.
pub fn oblique(t: &Subspace, s: &Subspace, tol: &Tolerances) -> Result<Idempotent> {
    if !direct_sum_is_all(t, s, tol)? {
        return Err(Error::NotComplementary);
    }
    let k = t.dim();
    let x = t.basis().hstack(s.basis());
    let xinv = try_inverse(&x, tol).map_err(|_| Error::NotComplementary)?;
    let top: Vec<usize> = (0..k).collect();
    let m = t.basis() * &xinv.select_rows(&top);
    Ok(Idempotent {
        m,
        range: t.clone(),
        kernel: s.clone(),
    })
}

/// Random rank-`r` idempotent in `M_n(ℂ)`, deterministic per seed.
///
/// The range is a random `r`-dimensional subspace `T`; the kernel is the
/// span of `C + skew · B_T · G` with `C` an orthonormal basis of `T^⊥` and `G`
/// Gaussian. `skew = 0` gives the hermitian projector onto `T`, and `‖p‖`
/// grows with `skew`.
pub fn random_idempotent(n: usize, r: usize, skew: f64, seed: u64) -> Idempotent {
    assert!(r <= n, "rank exceeds dimension");
    let tol = Tolerances::default();
    let mut g = GaussianStream::new(seed, 0);
    let w = g.unitary(n);
    let t = Subspace::from_orthonormal(w.select_columns(&(0..r).collect::<Vec<_>>()));
    let c = w.select_columns(&(r..n).collect::<Vec<_>>());
    if skew == 0.0 || r == 0 || r == n {
        let s = Subspace::from_orthonormal(c);
        return oblique(&t, &s, &tol).expect("orthogonal complements are complementary");
    }
    let tilt = &(t.basis() * &g.matrix(r, n - r)).scale_real(skew) + &c;
    let s = Subspace::from_orthonormal(tilt.orthonormalize_columns());
    oblique(&t, &s, &tol).expect("tilted complement stays complementary")
}

/// Which subspaces of an idempotent a perturbation is allowed to move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbMode {
    /// Rotate range and kernel independently.
    General,
    /// Rotate the range only; `null(p′) = null(p)`.
    KernelPreserving,
}

/// Idempotent `p′` with `‖p − p′‖₂ ≤ magnitude`.
///
/// Range and kernel bases are rotated by Cayley transforms
/// `R(θ) = (1 − θK/2)⁻¹(1 + θK/2)` of random unit skew-Hermitian `K`, and
/// `p′(θ) = oblique(R₁B_t, R₂B_s)`. The angle is found by bisection so that
/// `‖p − p′‖` lands just below `magnitude`.
pub fn perturb_idempotent(p: &Idempotent, magnitude: f64, seed: u64) -> Result<Idempotent> {
    perturb_with_mode(p, magnitude, seed, PerturbMode::General)
}

pub fn perturb_with_mode(
    p: &Idempotent,
    magnitude: f64,
    seed: u64,
    mode: PerturbMode,
) -> Result<Idempotent> {
    assert!(magnitude >= 0.0 && magnitude.is_finite());
    let n = p.dim();
    if magnitude == 0.0 || p.rank() == 0 || p.rank() == n {
        return Ok(p.clone());
    }
    let tol = Tolerances::default();
    let mut g = GaussianStream::new(seed, 1);
    let k_range = g.skew_hermitian(n);
    let k_kernel = g.skew_hermitian(n);
    let build = |theta: f64| -> Option<Idempotent> {
        let t = Subspace::from_orthonormal(&cayley(&k_range, theta)? * p.range().basis());
        let s = match mode {
            PerturbMode::General => {
                Subspace::from_orthonormal(&cayley(&k_kernel, theta)? * p.kernel().basis())
            }
            PerturbMode::KernelPreserving => p.kernel().clone(),
        };
        oblique(&t, &s, &tol).ok()
    };
    let dist = |q: &Idempotent| (p.matrix() - q.matrix()).spectral_norm();

    // Bracket: f(lo) ≤ magnitude < f(hi), where failed reconstructions count as +∞.
    let mut lo = 0.0;
    let mut lo_val = p.clone();
    let mut hi = magnitude.min(1.0) / (1.0 + p.norm());
    let mut lost_complement = false;
    loop {
        match build(hi) {
            Some(q) if dist(&q) <= magnitude => {
                lo = hi;
                lo_val = q;
                hi *= 2.0;
                if hi > 8.0 {
                    return Ok(lo_val);
                }
            }
            Some(_) => break,
            None => {
                lost_complement = true;
                break;
            }
        }
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        match build(mid) {
            Some(q) if dist(&q) <= magnitude => {
                lo = mid;
                lo_val = q;
            }
            Some(_) => hi = mid,
            None => {
                lost_complement = true;
                hi = mid;
            }
        }
    }
    if lost_complement && dist(&lo_val) < 0.5 * magnitude {
        return Err(Error::PerturbationTooLarge);
    }
    Ok(lo_val)
}

fn cayley(k: &Matrix, theta: f64) -> Option<Matrix> {
    let h = k.scale_real(0.5 * theta);
    let minus = h.one_minus();
    let plus = h.one_plus();
    let inv = try_inverse(&minus, &Tolerances::default()).ok()?;
    Some(&inv * &plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Scalar;
    use crate::subspace::{equals, gap};

    fn span(cols: &[&[f64]]) -> Subspace {
        let n = cols[0].len();
        let m = Matrix::from_fn(n, cols.len(), |i, j| Scalar::new(cols[j][i], 0.0));
        range_of(&m, &Tolerances::default())
    }

    #[test]
    fn projector_examples() {
        let p = projector(&span(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]));
        assert!(p
            .matrix()
            .approx_eq(&Matrix::from_real_diag(&[1.0, 1.0, 0.0]), 1e-15));
        let z = projector(&Subspace::zero(3));
        assert_eq!(z.matrix(), &Matrix::zeros(3, 3));
        assert_eq!(z.kernel().dim(), 3);

        let tol = Tolerances::default();
        let mut g = GaussianStream::new(4, 0);
        let t = range_of(&g.matrix(4, 2), &tol);
        let p = projector(&t);
        assert!(p.matrix().is_hermitian(1e-14));
        assert!(idempotency_residual(p.matrix()) < 1e-14);
        assert!((p.norm() - 1.0).abs() < 1e-14);
        assert!(equals(&range_of(p.matrix(), &tol), &t, &tol).unwrap());
    }

    #[test]
    fn oblique_examples() {
        let tol = Tolerances::default();
        let p = oblique(&span(&[&[1.0, 0.0]]), &span(&[&[0.0, 1.0]]), &tol).unwrap();
        assert!(p
            .matrix()
            .approx_eq(&Matrix::from_real_diag(&[1.0, 0.0]), 1e-15));
        let p = oblique(&span(&[&[1.0, 0.0]]), &span(&[&[1.0, 1.0]]), &tol).unwrap();
        assert!(p
            .matrix()
            .approx_eq(&Matrix::from_real_rows(&[&[1.0, -1.0], &[0.0, 0.0]]), 1e-14));
        let p = oblique(
            &span(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]),
            &span(&[&[0.0, 0.0, 1.0]]),
            &tol,
        )
        .unwrap();
        assert!(p
            .matrix()
            .approx_eq(&Matrix::from_real_diag(&[1.0, 1.0, 0.0]), 1e-15));
        assert!(matches!(
            oblique(&span(&[&[1.0, 0.0]]), &span(&[&[2.0, 0.0]]), &tol),
            Err(Error::NotComplementary)
        ));
    }

    #[test]
    fn oblique_is_basis_independent() {
        let tol = Tolerances::default();
        let mut g = GaussianStream::new(12, 0);
        let t = g.matrix(5, 2);
        let s = g.matrix(5, 3);
        let p1 = oblique(&range_of(&t, &tol), &range_of(&s, &tol), &tol).unwrap();
        let t2 = &t * &g.matrix(2, 2);
        let s2 = &s * &g.matrix(3, 3);
        let p2 = oblique(&range_of(&t2, &tol), &range_of(&s2, &tol), &tol).unwrap();
        assert!((p1.matrix() - p2.matrix()).spectral_norm() < 1e-10 * p1.norm());
    }

    #[test]
    fn random_idempotent_examples() {
        let z = random_idempotent(3, 0, 1.0, 1);
        assert!(z.matrix().approx_eq(&Matrix::zeros(3, 3), 0.0));
        let i = random_idempotent(3, 3, 1.0, 1);
        assert!(i.matrix().approx_eq(&Matrix::identity(3), 1e-14));
        let p = random_idempotent(4, 2, 1.0, 7);
        assert!(idempotency_residual(p.matrix()) <= 1e-12);
        assert_eq!(crate::linalg::rank(p.matrix(), &Tolerances::default()), 2);
        let h = random_idempotent(4, 2, 0.0, 7);
        assert!(h.matrix().is_hermitian(1e-13));
    }

    #[test]
    fn skew_increases_norm() {
        let n0 = random_idempotent(5, 2, 0.0, 3).norm();
        let n1 = random_idempotent(5, 2, 1.0, 3).norm();
        let n2 = random_idempotent(5, 2, 4.0, 3).norm();
        assert!((n0 - 1.0).abs() < 1e-13);
        assert!(n1 > n0 && n2 > n1);
    }

    #[test]
    fn perturb_examples() {
        let tol = Tolerances::default();
        let p = Idempotent::new(Matrix::from_real_diag(&[1.0, 0.0]), &tol).unwrap();
        assert!(perturb_idempotent(&p, 0.0, 3)
            .unwrap()
            .matrix()
            .approx_eq(p.matrix(), 0.0));

        let q = perturb_idempotent(&p, 0.1, 3).unwrap();
        assert!(idempotency_residual(q.matrix()) < 1e-13);
        let d = (p.matrix() - q.matrix()).spectral_norm();
        assert!(d <= 0.1 && d > 0.09, "distance {d}");

        let p = Idempotent::new(Matrix::from_real_diag(&[1.0, 1.0, 0.0]), &tol).unwrap();
        let q = perturb_idempotent(&p, 0.05, 11).unwrap();
        assert_eq!(q.rank(), 2);
        assert!(gap(p.range(), q.range()).unwrap().gap <= 0.05);
    }

    #[test]
    fn kernel_preserving_perturbation() {
        let tol = Tolerances::default();
        let p = random_idempotent(5, 3, 1.0, 21);
        let q = perturb_with_mode(&p, 0.05, 4, PerturbMode::KernelPreserving).unwrap();
        assert!(equals(p.kernel(), q.kernel(), &tol).unwrap());
        assert!((p.matrix() - q.matrix()).spectral_norm() <= 0.05);
        assert!(!equals(p.range(), q.range(), &tol).unwrap());
    }
}
