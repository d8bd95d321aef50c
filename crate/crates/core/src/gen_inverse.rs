//! Outer generalized inverses with prescribed idempotents.
//!
//! For `a ∈ M_n(ℂ)` and idempotents `p`, `q`, the `(p, q, l)`-outer inverse is
//! the unique `b` with `bab = b`, `col(b) = col(p)` and `null(b) = col(q)`.
//! It is computed as
//!
//! ```text
//! b = U · (M₀ a U)⁻¹ · M₀
//! ```
//!
//! where the columns of `U` form a basis of `col(p)` and the rows of `M₀`
//! cut out `col(q)` (`null(M₀) = col(q)`). The inverse exists exactly when
//! the `r × r` core `M₀ a U` is invertible, so its smallest singular value is
//! a direct existence margin.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::idempotent::{idempotency_residual, Idempotent};
use crate::linalg::exact::{exact_product, ExactMatrix};
use crate::linalg::{product, pseudo_inverse, try_inverse, Matrix, Svd};
use crate::subspace::{
    direct_sum_is_all, gap, intersection_trivial, kernel_of, map_subspace, range_of,
    range_of_scaled, Subspace,
};
use crate::tol::Tolerances;

/// Outcome of the existence test for `a^{(2,l)}_{p,q}`.
#[derive(Clone, Debug)]
pub struct ExistenceReport {
    /// `null(a) ∩ col(p) = {0}`.
    pub trivial_kernel_intersection: bool,
    /// `a·col(p) ∔ col(q) = ℂⁿ`.
    pub direct_sum: bool,
    /// `rank p + rank q = n`.
    pub dims_compatible: bool,
    /// Smallest singular value of the core `M₀ a U`; `+∞` for an empty core.
    pub sigma_min_core: f64,
    /// `tol_inv · ‖a‖`.
    pub threshold: f64,
    pub exists: bool,
    /// Only filled by [`exists_l`].
    pub inner: Option<InnerConditions>,
    /// `(t, s)` with `p = t(1−q)ap` and `1−q = (1−q)aps`.
    pub certificates: Option<(Matrix, Matrix)>,
}

/// Complement conditions characterizing `a^{(l)}_{p,q}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InnerConditions {
    /// `col(a) ∔ col(q) = ℂⁿ`.
    pub range_complements_q: bool,
    /// `null(a) ∔ col(p) = ℂⁿ`.
    pub kernel_complements_p: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    pub outer_pql: bool,
    pub l_inverse: bool,
    pub strict_pq: bool,
    pub strict_12: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    /// `‖bab − b‖`
    pub bab_b: f64,
    /// `‖aba − a‖`
    pub aba_a: f64,
    /// `‖ba − p‖`
    pub ba_p: f64,
    /// `‖1 − ab − q‖`
    pub one_ab_q: f64,
    /// `δ̂(col b, col p)`
    pub range_gap: f64,
    /// `δ̂(null b, col q)`
    pub kernel_gap: f64,
}

#[derive(Clone, Debug)]
pub struct GInvResult {
    pub b: Matrix,
    pub flags: Flags,
    pub residuals: Residuals,
}

/// `w` with certified range `col(p)` and kernel `col(q)`.
#[derive(Clone, Debug)]
pub struct Witness {
    pub w: Matrix,
    pub certified_range: Subspace,
    pub certified_kernel: Subspace,
}

fn check_shapes(a: &Matrix, p: &Idempotent, q: &Idempotent) -> Result<()> {
    if !a.is_square() || p.dim() != a.rows() || q.dim() != a.rows() {
        return Err(Error::Dimension(
            "a, p and q must be square of the same size",
        ));
    }
    Ok(())
}

/// Orthonormal rows cutting out `col(q)`: `M₀ = Q^*` with `Q` a basis of `col(q)^⊥`.
fn annihilator_rows(q: &Idempotent, tol: &Tolerances) -> Matrix {
    q.range().orthogonal_complement(tol).basis().adjoint()
}

fn core_sigma_min(core: &Matrix) -> f64 {
    if core.rows() != core.cols() {
        return 0.0;
    }
    if core.rows() == 0 {
        return f64::INFINITY;
    }
    Svd::new(core).sigma_min()
}

/// `b = U (M₀ a U)⁻¹ M₀` for explicit bases. `u` must span `col(p)` and
/// `m0` must have `null(m0) = col(q)`; neither needs to be orthonormal.
pub fn outer_inverse_from_bases(
    a: &Matrix,
    u: &Matrix,
    m0: &Matrix,
    tol: &Tolerances,
) -> Result<Matrix> {
    let core = product(&[m0, a, u]);
    if !core.is_square() {
        return Err(Error::NotExists);
    }
    if core.rows() == 0 {
        return Ok(Matrix::zeros(a.rows(), a.cols()));
    }
    let sigma = core_sigma_min(&core);
    let threshold = tol.tol_inv * a.spectral_norm();
    if sigma.is_nan() || sigma <= threshold {
        return Err(Error::IllConditioned {
            sigma_min: sigma,
            threshold,
        });
    }
    let inv = try_inverse(&core, tol).map_err(|_| Error::IllConditioned {
        sigma_min: sigma,
        threshold,
    })?;
    Ok(product(&[u, &inv, m0]))
}

fn existence(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    tol: &Tolerances,
) -> Result<ExistenceReport> {
    check_shapes(a, p, q)?;
    let n = a.rows();
    let ker_a = kernel_of(a, tol);
    let trivial_kernel_intersection = intersection_trivial(&ker_a, p.range(), tol)?;
    let a_range_p = map_subspace(a, p.range(), tol)?;
    let direct_sum = direct_sum_is_all(&a_range_p, q.range(), tol)?;
    let dims_compatible = p.rank() + q.rank() == n;
    let core = product(&[&annihilator_rows(q, tol), a, p.range().basis()]);
    let sigma_min_core = core_sigma_min(&core);
    let threshold = tol.tol_inv * a.spectral_norm();
    let exists =
        trivial_kernel_intersection && direct_sum && dims_compatible && sigma_min_core > threshold;
    Ok(ExistenceReport {
        trivial_kernel_intersection,
        direct_sum,
        dims_compatible,
        sigma_min_core,
        threshold,
        exists,
        inner: None,
        certificates: None,
    })
}

/// Existence of `a^{(2,l)}_{p,q}`: `null(a) ∩ col(p) = {0}` and
/// `a·col(p) ∔ col(q) = ℂⁿ`, cross-checked against invertibility of the core.
/// When it exists the certificates are `t = s = b`.
pub fn exists_outer_pql(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    tol: &Tolerances,
) -> Result<ExistenceReport> {
    let mut report = existence(a, p, q, tol)?;
    if report.exists {
        let b = outer_inverse_from_bases(a, p.range().basis(), &annihilator_rows(q, tol), tol)?;
        report.certificates = Some((b.clone(), b));
    }
    Ok(report)
}

/// Residuals of the certificate identities `p = t(1−q)ap`, `1−q = (1−q)aps`.
pub fn certificate_residuals(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    t: &Matrix,
    s: &Matrix,
) -> (f64, f64) {
    let one_q = q.matrix().one_minus();
    let core = product(&[&one_q, a, p.matrix()]);
    let r1 = (&product(&[t, &core]) - p.matrix()).spectral_norm();
    let r2 = (&product(&[&core, s]) - &one_q).spectral_norm();
    (r1, r2)
}

/// Computes `a^{(2,l)}_{p,q}` and classifies it.
pub fn compute_outer_pql(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    tol: &Tolerances,
) -> Result<GInvResult> {
    let report = existence(a, p, q, tol)?;
    if !(report.trivial_kernel_intersection && report.direct_sum && report.dims_compatible) {
        return Err(Error::NotExists);
    }
    if report.sigma_min_core.is_nan() || report.sigma_min_core <= report.threshold {
        return Err(Error::IllConditioned {
            sigma_min: report.sigma_min_core,
            threshold: report.threshold,
        });
    }
    let b = outer_inverse_from_bases(a, p.range().basis(), &annihilator_rows(q, tol), tol)?;
    Ok(classify_strict(a, p, q, b, tol))
}

/// Existence of `a^{(l)}_{p,q}`: `col(a) ∔ col(q) = ℂⁿ = null(a) ∔ col(p)`.
pub fn exists_l(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    tol: &Tolerances,
) -> Result<ExistenceReport> {
    let mut report = exists_outer_pql(a, p, q, tol)?;
    let inner = InnerConditions {
        range_complements_q: direct_sum_is_all(&range_of(a, tol), q.range(), tol)?,
        kernel_complements_p: direct_sum_is_all(&kernel_of(a, tol), p.range(), tol)?,
    };
    report.exists = report.exists && inner.range_complements_q && inner.kernel_complements_p;
    report.inner = Some(inner);
    Ok(report)
}

/// Computes `a^{(l)}_{p,q}`; fails with `NotExists` unless the complement
/// conditions hold and the computed `b` also satisfies `aba = a`.
pub fn compute_l(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    tol: &Tolerances,
) -> Result<GInvResult> {
    let report = exists_l(a, p, q, tol)?;
    if !report.exists {
        return Err(Error::NotExists);
    }
    let res = compute_outer_pql(a, p, q, tol)?;
    if !res.flags.l_inverse {
        return Err(Error::NotExists);
    }
    Ok(res)
}

/// Residuals and flags for a candidate `b`.
pub fn classify_strict(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    b: Matrix,
    tol: &Tolerances,
) -> GInvResult {
    let ab = a * &b;
    let ba = &b * a;
    let bab = &ba * &b;
    let aba = &ab * a;
    let range_gap = gap(&range_of(&b, tol), p.range())
        .map(|g| g.gap)
        .unwrap_or(1.0);
    let kernel_gap = gap(&kernel_of(&b, tol), q.range())
        .map(|g| g.gap)
        .unwrap_or(1.0);
    let residuals = Residuals {
        bab_b: (&bab - &b).spectral_norm(),
        aba_a: (&aba - a).spectral_norm(),
        ba_p: (&ba - p.matrix()).spectral_norm(),
        one_ab_q: (&ab.one_minus() - q.matrix()).spectral_norm(),
        range_gap,
        kernel_gap,
    };
    let thr = tol.identity_threshold(a.spectral_norm(), b.spectral_norm());
    let sub = tol.subspace_threshold();
    let outer_pql = residuals.bab_b <= thr && range_gap <= sub && kernel_gap <= sub;
    let l_inverse = outer_pql && residuals.aba_a <= thr;
    let strict_pq = residuals.bab_b <= thr && residuals.ba_p <= thr && residuals.one_ab_q <= thr;
    let strict_12 = strict_pq && residuals.aba_a <= thr;
    GInvResult {
        b,
        flags: Flags {
            outer_pql,
            l_inverse,
            strict_pq,
            strict_12,
        },
        residuals,
    }
}

/// Group inverse via a rank factorization `x = FG`: `x^# = F(GF)⁻²G`.
pub fn group_inverse(x: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    if !x.is_square() {
        return Err(Error::Dimension("group inverse of a non-square matrix"));
    }
    let svd = Svd::new(x);
    let (f, g) = svd.rank_factorization(tol);
    if f.cols() == 0 {
        return Ok(Matrix::zeros(x.rows(), x.cols()));
    }
    let gf = &g * &f;
    let inv = try_inverse(&gf, tol).map_err(|_| Error::NoGroupInverse)?;
    Ok(product(&[&f, &inv, &inv, &g]))
}

/// A `(1,5)`-inverse (`xyx = x`, `xy = yx`), realized by the group inverse.
pub fn one_five_inverse(x: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    group_inverse(x, tol).map_err(|e| match e {
        Error::NoGroupInverse => Error::NotExists,
        other => other,
    })
}

/// An inner inverse (`xyx = x`), realized by the Moore–Penrose pseudoinverse.
pub fn inner_inverse(x: &Matrix, tol: &Tolerances) -> Matrix {
    pseudo_inverse(x, tol)
}

/// `w = U Q^*` with `U` an orthonormal basis of `col(p)` and `Q` one of `col(q)^⊥`.
pub fn build_witness(p: &Idempotent, q: &Idempotent, tol: &Tolerances) -> Result<Witness> {
    if p.dim() != q.dim() {
        return Err(Error::Dimension("p and q differ in size"));
    }
    witness_from_subspaces(p.range(), q.range(), tol)
}

/// `w` with `col(w) = range` and `null(w) = kernel`.
pub fn witness_from_subspaces(
    range: &Subspace,
    kernel: &Subspace,
    tol: &Tolerances,
) -> Result<Witness> {
    if range.dim() + kernel.dim() != range.ambient_dim() {
        return Err(Error::DimMismatch);
    }
    let q_perp = kernel.orthogonal_complement(tol);
    let w = range.basis() * &q_perp.basis().adjoint();
    Ok(Witness {
        w,
        certified_range: range.clone(),
        certified_kernel: kernel.clone(),
    })
}

/// The three witness representations of `a^{(2,l)}_{p,q}` next to the direct one.
#[derive(Clone, Debug)]
pub struct Representation15 {
    /// `(wa)^{(1,5)} w`
    pub via_wa: Matrix,
    /// `w (aw)^{(1,5)}`
    pub via_aw: Matrix,
    /// `w (waw)⁻ w`
    pub via_inner: Matrix,
    pub direct: Matrix,
    /// Largest pairwise spectral-norm difference among the four.
    pub max_deviation: f64,
}

pub fn representation_15(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    tol: &Tolerances,
) -> Result<Representation15> {
    let direct = compute_outer_pql(a, p, q, tol)?.b;
    let w = build_witness(p, q, tol)?.w;
    let wa = &w * a;
    let aw = a * &w;
    let via_wa = &one_five_inverse(&wa, tol)? * &w;
    let via_aw = &w * &one_five_inverse(&aw, tol)?;
    let via_inner = product(&[&w, &inner_inverse(&(&wa * &w), tol), &w]);
    let all = [&via_wa, &via_aw, &via_inner, &direct];
    let mut max_deviation: f64 = 0.0;
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            max_deviation = max_deviation.max((all[i] - all[j]).spectral_norm());
        }
    }
    if max_deviation > tol.identity_threshold(a.spectral_norm(), direct.spectral_norm()) {
        return Err(Error::RepresentationMismatch(max_deviation));
    }
    Ok(Representation15 {
        via_wa,
        via_aw,
        via_inner,
        direct,
        max_deviation,
    })
}

/// `a^{(1,2)}_{p,q} = (wa)^# w` for a witness with `wa = p`, `aw = 1 − q`.
#[derive(Clone, Debug)]
pub struct GroupRepresentation {
    pub b: Matrix,
    /// `‖(wa)^# w − w (aw)^#‖`
    pub deviation: f64,
    /// `‖bab − b‖, ‖aba − a‖, ‖ba − wa‖, ‖ab − aw‖`
    pub residuals: [f64; 4],
}

pub fn representation_group_12(
    a: &Matrix,
    w: &Matrix,
    tol: &Tolerances,
) -> Result<GroupRepresentation> {
    if !a.is_square() || w.rows() != a.rows() || w.cols() != a.cols() {
        return Err(Error::Dimension("a and w must be square of the same size"));
    }
    let wa = w * a;
    let aw = a * w;
    for x in [&wa, &aw] {
        let nrm = x.spectral_norm();
        if idempotency_residual(x) > tol.tol_eq * (1.0 + nrm * nrm) {
            return Err(Error::BadWitness);
        }
    }
    let b = &group_inverse(&wa, tol)? * w;
    let alt = w * &group_inverse(&aw, tol)?;
    let deviation = (&b - &alt).spectral_norm();
    let ab = a * &b;
    let ba = &b * a;
    let residuals = [
        (&(&ba * &b) - &b).spectral_norm(),
        (&(&ab * a) - a).spectral_norm(),
        (&ba - &wa).spectral_norm(),
        (&ab - &aw).spectral_norm(),
    ];
    let thr = tol.identity_threshold(a.spectral_norm(), b.spectral_norm());
    let worst = residuals.iter().copied().fold(deviation, f64::max);
    if worst > thr {
        return Err(Error::RepresentationMismatch(worst));
    }
    Ok(GroupRepresentation {
        b,
        deviation,
        residuals,
    })
}

/// Left-ideal form of the existence test, evaluated on adjoints:
/// `null(a^*) ∩ col((1−q)^*) = {0}` and
/// `a^*·col((1−q)^*) ∔ col((1−p)^*) = ℂⁿ`.
pub fn exists_dual_check(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    tol: &Tolerances,
) -> Result<bool> {
    check_shapes(a, p, q)?;
    let a_star = a.adjoint();
    let left_one_q = range_of_scaled(&q.matrix().one_minus().adjoint(), 1.0 + q.norm(), tol);
    let left_one_p = range_of_scaled(&p.matrix().one_minus().adjoint(), 1.0 + p.norm(), tol);
    let trivial = intersection_trivial(&kernel_of(&a_star, tol), &left_one_q, tol)?;
    let sum = direct_sum_is_all(&map_subspace(&a_star, &left_one_q, tol)?, &left_one_p, tol)?;
    Ok(trivial && sum)
}

/// Exact `a^{(2,l)}_{p,q}` over `ℚ(i)` using pivot columns of `p` and pivot
/// rows of `1 − q` as bases.
pub fn compute_outer_pql_exact(
    a: &ExactMatrix,
    p: &ExactMatrix,
    q: &ExactMatrix,
) -> Result<ExactMatrix> {
    let n = a.rows();
    if a.cols() != n || p.rows() != n || q.rows() != n {
        return Err(Error::Dimension(
            "exact a, p, q must be square of the same size",
        ));
    }
    if !p.is_idempotent() || !q.is_idempotent() {
        return Err(Error::NotIdempotent(0.0));
    }
    let u = p.column_basis();
    let m0 = q.one_minus().row_basis();
    if u.cols() != m0.rows() {
        return Err(Error::NotExists);
    }
    if u.cols() == 0 {
        return Ok(ExactMatrix::zeros(n, n));
    }
    let core = exact_product(&[&m0, a, &u]);
    let inv = core.inverse().map_err(|_| Error::NotExists)?;
    Ok(exact_product(&[&u, &inv, &m0]))
}

/// Exact verification of the defining equations of `a^{(2,l)}_{p,q}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactChecks {
    pub bab_eq_b: bool,
    /// `col(b) = col(p)`
    pub range_eq: bool,
    /// `null(b) = col(q)`
    pub kernel_eq: bool,
    pub aba_eq_a: bool,
    pub ba_eq_p: bool,
    pub one_ab_eq_q: bool,
}

pub fn exact_checks(
    a: &ExactMatrix,
    p: &ExactMatrix,
    q: &ExactMatrix,
    b: &ExactMatrix,
) -> ExactChecks {
    let ab = a * b;
    let ba = b * a;
    let rank_b = b.rank();
    let bp = stack(b, p);
    // col(b) = col(p) ⇔ rank b = rank p = rank [b | p]
    let range_eq = rank_b == p.rank() && bp.rank() == rank_b;
    // null(b) = col(q) ⇔ bq = 0 and dim null(b) = rank q
    let kernel_eq = (b * q).is_zero() && b.cols() - rank_b == q.rank();
    ExactChecks {
        bab_eq_b: &(&ba * b) == b,
        range_eq,
        kernel_eq,
        aba_eq_a: &(&ab * a) == a,
        ba_eq_p: &ba == p,
        one_ab_eq_q: &ab.one_minus() == q,
    }
}

fn stack(x: &ExactMatrix, y: &ExactMatrix) -> ExactMatrix {
    let c = x.cols();
    ExactMatrix::from_fn(x.rows(), c + y.cols(), |i, j| {
        if j < c {
            x[(i, j)].clone()
        } else {
            y[(i, j - c)].clone()
        }
    })
}

/// Column indices helper for callers building bases by hand.
pub fn first_columns(m: &Matrix, k: usize) -> Matrix {
    m.select_columns(&(0..k).collect::<Vec<_>>())
}
