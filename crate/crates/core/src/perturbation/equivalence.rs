use alloc::vec;
use alloc::vec::Vec;

use super::{
    invertible, relative, stability, strictly_below, update_formula, Condition, EquivalenceReport,
    Implication, Scenario,
};
use crate::error::{Error, Result};
use crate::gen_inverse::{
    classify_strict, compute_l, compute_outer_pql, exists_l, exists_outer_pql,
};
use crate::idempotent::idempotency_residual;
use crate::linalg::{product, try_inverse, Matrix};
use crate::subspace::{
    contains, equals, gap, intersection_trivial, kernel_of, map_subspace, one_sided_gap, range_of,
    range_of_scaled,
};

fn zero_condition(name: &'static str, m: &Matrix, threshold: f64) -> Condition {
    let r = m.spectral_norm();
    Condition::new(name, r <= threshold, r)
}

fn subspace_condition(
    name: &'static str,
    m: &crate::Subspace,
    n: &crate::Subspace,
    s: &Scenario,
) -> Condition {
    let g = gap(m, n).map(|g| g.gap).unwrap_or(1.0);
    Condition::new(name, equals(m, n, &s.tol).unwrap_or(false), g)
}

fn inv_or_not_exists(m: &Matrix, s: &Scenario) -> Result<Matrix> {
    try_inverse(m, &s.tol).map_err(|_| Error::NotExists)
}

/// `1 + δa·b` invertible ⇔ `1 + b·δa` invertible ⇔ `ā^{(2,l)}_{p,q}` exists.
/// When all hold, the update formula is compared with the direct computation.
pub fn equivalence_thm24(s: &Scenario) -> Result<EquivalenceReport> {
    let b = s.base_inverse()?;
    let a_bar = s.a_bar();
    let mut c1 = invertible(&(&s.delta_a * &b).one_plus(), &s.tol);
    c1.name = "one_plus_delta_a_b_invertible";
    let mut c2 = invertible(&(&b * &s.delta_a).one_plus(), &s.tol);
    c2.name = "one_plus_b_delta_a_invertible";
    let ex = exists_outer_pql(&a_bar, &s.p, &s.q, &s.tol)?;
    let c3 = Condition::new("perturbed_inverse_exists", ex.exists, ex.sigma_min_core);
    let all = c1.holds && c2.holds && c3.holds;
    let report = EquivalenceReport::build(vec![c1, c2, c3], Vec::new());
    if !all {
        return Ok(report);
    }
    let upd = update_formula(&b, &s.delta_a, &s.tol)?;
    let direct = compute_outer_pql(&a_bar, &s.p, &s.q, &s.tol)?.b;
    let dn = direct.spectral_norm();
    let diff = (&upd - &direct).spectral_norm();
    let agrees = diff <= s.tol.identity_threshold(a_bar.spectral_norm(), dn);
    Ok(report.with_formula(relative(diff, dn), agrees))
}

/// `f = (1 + bδa)⁻¹(1 − ba)` is idempotent with `null(ā) ⊆ col(f)`, and
/// `null(ā) = col(f)` exactly when `ā` is a stable perturbation.
pub fn lemma26_f(s: &Scenario) -> Result<(Matrix, EquivalenceReport)> {
    let b = s.base_inverse()?;
    let a_bar = s.a_bar();
    let inv = inv_or_not_exists(&(&b * &s.delta_a).one_plus(), s)?;
    let ba = &b * &s.a;
    let f = &inv * &ba.one_minus();
    let fn_ = f.spectral_norm();
    let idem = idempotency_residual(&f);
    let null_abar = kernel_of(&a_bar, &s.tol);
    let col_f = range_of_scaled(&f, inv.spectral_norm() * (1.0 + ba.spectral_norm()), &s.tol);
    let sub = one_sided_gap(&null_abar, &col_f)?;
    let invariants = vec![
        Condition::new(
            "f_idempotent",
            idem <= s.tol.tol_eq * (1.0 + fn_ * fn_),
            idem,
        ),
        Condition::new(
            "kernel_in_range_f",
            contains(&col_f, &null_abar, &s.tol)?,
            sub,
        ),
    ];
    let conditions = vec![
        subspace_condition("kernel_equals_range_f", &null_abar, &col_f, s),
        stability(s),
    ];
    Ok((f, EquivalenceReport::build(conditions, invariants)))
}

/// With `w = b(1 + δa·b)⁻¹`: `w` is the inner-outer inverse of `ā` ⇔ stable ⇔
/// `ā(1 + bδa)⁻¹(1 − ba) = 0` ⇔ `(1 − ab)(1 + δa·b)⁻¹ā = 0`.
pub fn equivalence_thm27(s: &Scenario) -> Result<EquivalenceReport> {
    let b = s.base_inverse()?;
    let a_bar = s.a_bar();
    let inv_r = inv_or_not_exists(&(&b * &s.delta_a).one_plus(), s)?;
    let inv_l = inv_or_not_exists(&(&s.delta_a * &b).one_plus(), s)?;
    let w = update_formula(&b, &s.delta_a, &s.tol)?;
    let thr = s
        .tol
        .identity_threshold(a_bar.spectral_norm(), b.spectral_norm());
    let cls = classify_strict(&a_bar, &s.p, &s.q, w, &s.tol);
    let c1 = Condition::new(
        "update_is_inner_inverse",
        cls.flags.l_inverse,
        cls.residuals.aba_a,
    );
    let c3 = zero_condition(
        "abar_kernel_identity",
        &product(&[&a_bar, &inv_r, &(&b * &s.a).one_minus()]),
        thr,
    );
    let c4 = zero_condition(
        "range_identity_abar",
        &product(&[&(&s.a * &b).one_minus(), &inv_l, &a_bar]),
        thr,
    );
    Ok(EquivalenceReport::build(
        vec![c1, stability(s), c3, c4],
        Vec::new(),
    ))
}

/// Stable ⇔ `(1 + bδa)⁻¹null(ba) = null(ā)` ⇔ `(1 + δa·b)⁻¹col(ā) = col(ab)`.
pub fn equivalence_cor28(s: &Scenario) -> Result<EquivalenceReport> {
    let b = s.base_inverse()?;
    let a_bar = s.a_bar();
    let inv_r = inv_or_not_exists(&(&b * &s.delta_a).one_plus(), s)?;
    let inv_l = inv_or_not_exists(&(&s.delta_a * &b).one_plus(), s)?;
    let lhs2 = map_subspace(&inv_r, &kernel_of(&(&b * &s.a), &s.tol), &s.tol)?;
    let lhs3 = map_subspace(&inv_l, &range_of(&a_bar, &s.tol), &s.tol)?;
    let c2 = subspace_condition("kernel_transport", &lhs2, &kernel_of(&a_bar, &s.tol), s);
    let c3 = subspace_condition("range_transport", &lhs3, &range_of(&(&s.a * &b), &s.tol), s);
    Ok(EquivalenceReport::build(
        vec![stability(s), c2, c3],
        Vec::new(),
    ))
}

/// For an existing inner-outer inverse `b = a^{(l)}_{p,q}`:
/// (1) `1 + bδa` invertible, `col(ā) = null(q)` and the update formula gives
/// `ā^{(l)}_{p,q}`; (2) stable, `null(ā) ∩ col(p) = {0}` and
/// `ā·col(p) = null(q)`.
pub fn equivalence_thm_tm27(s: &Scenario) -> Result<EquivalenceReport> {
    let b = compute_l(&s.a, &s.p, &s.q, &s.tol)?.b;
    let a_bar = s.a_bar();
    let col_abar = range_of(&a_bar, &s.tol);
    let null_q = s.q.kernel();

    let inv = invertible(&(&b * &s.delta_a).one_plus(), &s.tol);
    let range_ok = subspace_condition("range_is_null_q", &col_abar, null_q, s);
    let (formula_ok, formula_res) = if inv.holds && exists_l(&a_bar, &s.p, &s.q, &s.tol)?.exists {
        match (
            update_formula(&b, &s.delta_a, &s.tol),
            compute_l(&a_bar, &s.p, &s.q, &s.tol),
        ) {
            (Ok(u), Ok(d)) => {
                let diff = (&u - &d.b).spectral_norm();
                let thr = s
                    .tol
                    .identity_threshold(a_bar.spectral_norm(), d.b.spectral_norm());
                (diff <= thr, relative(diff, d.b.spectral_norm()))
            }
            _ => (false, f64::INFINITY),
        }
    } else {
        (false, f64::INFINITY)
    };
    let first = Condition::new(
        "update_formula_inner",
        inv.holds && range_ok.holds && formula_ok,
        formula_res,
    );

    let st = stability(s);
    let ker_abar = kernel_of(&a_bar, &s.tol);
    let trivial = intersection_trivial(&ker_abar, s.p.range(), &s.tol)?;
    let image = map_subspace(&a_bar, s.p.range(), &s.tol)?;
    let image_ok = subspace_condition("image_is_null_q", &image, null_q, s);
    let second = Condition::new(
        "subspace_conditions",
        st.holds && trivial && image_ok.holds,
        image_ok.residual,
    );
    let report = EquivalenceReport::build(vec![first, second], Vec::new());
    if report.all_hold() {
        return Ok(report.with_formula(formula_res, formula_ok));
    }
    Ok(report)
}

/// Gap sufficient conditions for an existing `a^{(l)}_{p,q}`:
/// `δ(col ā, col a) < 1/‖1 − ab‖ ⇒ stable` and
/// `δ(null ā, null a) < 1/‖ba‖ ⇒ null(ā) ∩ col(p) = {0}`.
pub fn gap_sufficient_lemma210(s: &Scenario) -> Result<Vec<Implication>> {
    let b = compute_l(&s.a, &s.p, &s.q, &s.tol)?.b;
    let a_bar = s.a_bar();
    let (h1, h2) = gap_hypotheses(s, &b, &a_bar)?;
    let ker_abar = kernel_of(&a_bar, &s.tol);
    let c2 = Condition::new(
        "kernel_meets_range_p_trivially",
        intersection_trivial(&ker_abar, s.p.range(), &s.tol)?,
        super::intersection_margin(&ker_abar, s.p.range()),
    );
    Ok(vec![
        Implication::build("range_gap", vec![h1], vec![stability(s)]),
        Implication::build("kernel_gap", vec![h2], vec![c2]),
    ])
}

fn gap_hypotheses(s: &Scenario, b: &Matrix, a_bar: &Matrix) -> Result<(Condition, Condition)> {
    let d_range = one_sided_gap(&range_of(a_bar, &s.tol), &range_of(&s.a, &s.tol))?;
    let d_kernel = one_sided_gap(&kernel_of(a_bar, &s.tol), &kernel_of(&s.a, &s.tol))?;
    let t_range = 1.0 / (&s.a * b).one_minus().spectral_norm();
    let t_kernel = 1.0 / (b * &s.a).spectral_norm();
    Ok((
        Condition::new(
            "range_gap_small",
            strictly_below(d_range, t_range, &s.tol),
            d_range,
        ),
        Condition::new(
            "kernel_gap_small",
            strictly_below(d_kernel, t_kernel, &s.tol),
            d_kernel,
        ),
    ))
}

/// Either (i) both gap conditions and `ā·col(p) = null(q)`, or (ii) `1 + bδa`
/// invertible and the range gap condition, imply that `ā^{(l)}_{p,q}` exists
/// and equals `b(1 + δa·b)⁻¹`.
pub fn cor_lemas1(s: &Scenario) -> Result<Vec<Implication>> {
    let b = compute_l(&s.a, &s.p, &s.q, &s.tol)?.b;
    let a_bar = s.a_bar();
    let (h_range, h_kernel) = gap_hypotheses(s, &b, &a_bar)?;
    let image = map_subspace(&a_bar, s.p.range(), &s.tol)?;
    let image_ok = subspace_condition("image_is_null_q", &image, s.q.kernel(), s);
    let inv = invertible(&(&b * &s.delta_a).one_plus(), &s.tol);

    let exists = exists_l(&a_bar, &s.p, &s.q, &s.tol)?;
    let c_exists = Condition::new(
        "perturbed_inner_inverse_exists",
        exists.exists,
        exists.sigma_min_core,
    );
    let c_formula = match (exists.exists, update_formula(&b, &s.delta_a, &s.tol)) {
        (true, Ok(u)) => match compute_l(&a_bar, &s.p, &s.q, &s.tol) {
            Ok(d) => {
                let diff = (&u - &d.b).spectral_norm();
                let thr = s
                    .tol
                    .identity_threshold(a_bar.spectral_norm(), d.b.spectral_norm());
                Condition::new(
                    "formula_agrees",
                    diff <= thr,
                    relative(diff, d.b.spectral_norm()),
                )
            }
            Err(_) => Condition::new("formula_agrees", false, f64::INFINITY),
        },
        _ => Condition::new("formula_agrees", false, f64::INFINITY),
    };
    let conclusion = vec![c_exists, c_formula];
    Ok(vec![
        Implication::build(
            "gaps_and_image",
            vec![h_range.clone(), h_kernel, image_ok],
            conclusion.clone(),
        ),
        Implication::build("invertible_and_range_gap", vec![inv, h_range], conclusion),
    ])
}

/// For a strict `b = a^{(2)}_{p,q}` with `1 + bδa` invertible:
/// `ā^{(2)}_{p,q} = b(1 + δa·b)⁻¹` ⇔ `āp = (1 − q)ā` ⇔
/// (`āb = (1 − q)āb` and `bā = bāp`).
pub fn equivalence_thm212(s: &Scenario) -> Result<EquivalenceReport> {
    let base = compute_outer_pql(&s.a, &s.p, &s.q, &s.tol)?;
    if !base.flags.strict_pq {
        return Err(Error::NotExists);
    }
    let b = base.b;
    let a_bar = s.a_bar();
    inv_or_not_exists(&(&b * &s.delta_a).one_plus(), s)?;
    let w = update_formula(&b, &s.delta_a, &s.tol)?;
    let cls = classify_strict(&a_bar, &s.p, &s.q, w, &s.tol);
    let r = &cls.residuals;
    let c1 = Condition::new(
        "update_is_strict",
        cls.flags.strict_pq,
        r.bab_b.max(r.ba_p).max(r.one_ab_q),
    );

    let thr = s
        .tol
        .identity_threshold(a_bar.spectral_norm(), b.spectral_norm());
    let one_q = s.q.matrix().one_minus();
    let c2 = zero_condition(
        "intertwining",
        &(&(&a_bar * s.p.matrix()) - &(&one_q * &a_bar)),
        thr,
    );
    let ab = &a_bar * &b;
    let ba = &b * &a_bar;
    let r3a = (&ab - &(&one_q * &ab)).spectral_norm();
    let r3b = (&ba - &(&ba * s.p.matrix())).spectral_norm();
    let c3 = Condition::new(
        "one_sided_identities",
        r3a <= thr && r3b <= thr,
        r3a.max(r3b),
    );
    Ok(EquivalenceReport::build(vec![c1, c2, c3], Vec::new()))
}
