use alloc::vec;
use alloc::vec::Vec;

use super::{kappa, relative, strictly_below};
use crate::error::{Error, Result};
use crate::gen_inverse::{
    build_witness, compute_outer_pql, group_inverse, one_five_inverse, witness_from_subspaces,
    GInvResult,
};
use crate::idempotent::Idempotent;
use crate::linalg::{product, Matrix};
use crate::tol::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuxValue {
    pub name: &'static str,
    pub value: f64,
}

/// One evaluation of a perturbation bound.
///
/// `lhs`/`rhs` is the relative error bound `‖b′ − b‖/‖b‖ ≤ rhs`, and
/// `norm_lhs`/`norm_rhs` the companion bound on `‖b′‖/‖b‖`. When the
/// hypothesis fails nothing is asserted and `holds` is true.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub kappa: f64,
    pub hypothesis_satisfied: bool,
    pub conclusion_exists: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub norm_lhs: f64,
    pub norm_rhs: f64,
    pub holds: bool,
    pub aux: Vec<AuxValue>,
}

impl BoundReport {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kappa: f64,
        hyp: bool,
        perturbed: Option<&Matrix>,
        b: &Matrix,
        rhs: f64,
        norm_rhs: f64,
        aux: Vec<AuxValue>,
        tol: &Tolerances,
    ) -> Self {
        let bn = b.spectral_norm();
        let (lhs, norm_lhs) = match perturbed {
            Some(bp) => (
                relative((bp - b).spectral_norm(), bn),
                relative(bp.spectral_norm(), bn),
            ),
            None => (f64::INFINITY, f64::INFINITY),
        };
        let mut r = BoundReport {
            kappa,
            hypothesis_satisfied: hyp,
            conclusion_exists: perturbed.is_some(),
            lhs,
            rhs,
            margin: rhs - lhs,
            norm_lhs,
            norm_rhs,
            holds: true,
            aux,
        };
        r.holds = r.evaluate(tol);
        r
    }

    fn evaluate(&self, tol: &Tolerances) -> bool {
        !self.hypothesis_satisfied
            || (self.conclusion_exists
                && self.lhs <= self.rhs + tol.tol_eq
                && self.norm_lhs <= self.norm_rhs + tol.tol_eq)
    }

    /// The same report with both right-hand sides divided by `divisor`.
    /// Used to confirm that a deliberately false bound is caught.
    pub fn rescaled(&self, divisor: f64, tol: &Tolerances) -> BoundReport {
        let mut r = self.clone();
        r.rhs /= divisor;
        r.norm_rhs /= divisor;
        r.margin = r.rhs - r.lhs;
        r.holds = r.evaluate(tol);
        r
    }

    /// `lhs / rhs`, with `0/0 = 0`.
    pub fn ratio(&self) -> f64 {
        if self.rhs == 0.0 {
            if self.lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.lhs / self.rhs
        }
    }

    pub fn aux(&self, name: &str) -> Option<f64> {
        self.aux.iter().find(|x| x.name == name).map(|x| x.value)
    }
}

fn aux(name: &'static str, value: f64) -> AuxValue {
    AuxValue { name, value }
}

fn ratio_or_inf(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

fn base(a: &Matrix, p: &Idempotent, q: &Idempotent, tol: &Tolerances) -> Result<(Matrix, f64)> {
    let b = compute_outer_pql(a, p, q, tol)?.b;
    let k = kappa(a, &b);
    Ok((b, k))
}

fn perturbed(a: &Matrix, p: &Idempotent, q: &Idempotent, tol: &Tolerances) -> Option<GInvResult> {
    compute_outer_pql(a, p, q, tol).ok()
}

fn dist(x: &Idempotent, y: &Idempotent) -> f64 {
    (x.matrix() - y.matrix()).spectral_norm()
}

/// Perturbing `p`: if `‖p − p′‖ < 1/(1+κ)²` then `a^{(2,l)}_{p′,q}` exists,
/// `‖b′ − b‖/‖b‖ ≤ (1+κ)d/(1 − (1+κ)d)` and `‖b′‖ ≤ ‖b‖/(1 − (1+κ)d)`.
pub fn bound_thm34(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    p_prime: &Idempotent,
    tol: &Tolerances,
) -> Result<BoundReport> {
    let (b, k) = base(a, p, q, tol)?;
    let d = dist(p, p_prime);
    let threshold = 1.0 / ((1.0 + k) * (1.0 + k));
    let hyp = strictly_below(d, threshold, tol);
    let den = 1.0 - (1.0 + k) * d;
    let bp = perturbed(a, p_prime, q, tol);
    Ok(BoundReport::assemble(
        k,
        hyp,
        bp.as_ref().map(|r| &r.b),
        &b,
        ratio_or_inf((1.0 + k) * d, den),
        ratio_or_inf(1.0, den),
        vec![aux("d_p", d), aux("threshold_p", threshold)],
        tol,
    ))
}

/// `b + b(av)^{(1,5)}a(v − w)(1 − ab)`.
fn representation_q(
    a: &Matrix,
    b: &Matrix,
    w: &Matrix,
    v: &Matrix,
    tol: &Tolerances,
) -> Option<Matrix> {
    let av = a * v;
    let y = one_five_inverse(&av, tol).ok()?;
    let tail = product(&[b, &y, a, &(v - w), &(a * b).one_minus()]);
    Some(b + &tail)
}

/// Perturbing `q`: if `‖q − q′‖ < 1/(2+κ)` then `a^{(2,l)}_{p,q′}` exists,
/// `‖b′ − b‖/‖b‖ ≤ (1+κ)d/(1 − κd)` and `‖b′‖ ≤ (1+d)‖b‖/(1 − κd)`.
///
/// Also evaluates the witness representation of `b′` with `w`
/// (range `col p`, kernel `col q`) and `v` (range `col p`, kernel `col q′`),
/// reported as `repr_deviation`. The variant with `col v = col q′`,
/// `null v = col q` is reported as `repr_alt_deviation` when those
/// dimensions are compatible.
pub fn bound_thm36(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    q_prime: &Idempotent,
    tol: &Tolerances,
) -> Result<BoundReport> {
    let (b, k) = base(a, p, q, tol)?;
    let d = dist(q, q_prime);
    let threshold = 1.0 / (2.0 + k);
    let hyp = strictly_below(d, threshold, tol);
    let den = 1.0 - k * d;
    let bp = perturbed(a, p, q_prime, tol);
    let mut extra = vec![aux("d_q", d), aux("threshold_q", threshold)];
    if let Some(bp) = &bp {
        let dev = |x: Option<Matrix>| match x {
            Some(x) => relative((&x - &bp.b).spectral_norm(), bp.b.spectral_norm()),
            None => f64::NAN,
        };
        let w = build_witness(p, q, tol)?.w;
        let v = build_witness(p, q_prime, tol).ok().map(|x| x.w);
        extra.push(aux(
            "repr_deviation",
            dev(v.and_then(|v| representation_q(a, &b, &w, &v, tol))),
        ));
        if let Ok(v_alt) = witness_from_subspaces(q_prime.range(), q.range(), tol) {
            extra.push(aux(
                "repr_alt_deviation",
                dev(representation_q(a, &b, &w, &v_alt.w, tol)),
            ));
        }
    }
    Ok(BoundReport::assemble(
        k,
        hyp,
        bp.as_ref().map(|r| &r.b),
        &b,
        ratio_or_inf((1.0 + k) * d, den),
        ratio_or_inf(1.0 + d, den),
        extra,
        tol,
    ))
}

/// Perturbing both: with `‖p − p′‖ < 1/(1+κ)²`, `‖q − q′‖ < 1/(3+κ)` and
/// `D = 1 − (1+κ)d_p − κd_q`: `‖b′ − b‖/‖b‖ ≤ (1+κ)(d_p + d_q)/D` and
/// `‖b′‖ ≤ (1 + d_q)‖b‖/D`.
pub fn bound_thm38(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    p_prime: &Idempotent,
    q_prime: &Idempotent,
    tol: &Tolerances,
) -> Result<BoundReport> {
    let (b, k) = base(a, p, q, tol)?;
    let dp = dist(p, p_prime);
    let dq = dist(q, q_prime);
    let tp = 1.0 / ((1.0 + k) * (1.0 + k));
    let tq = 1.0 / (3.0 + k);
    let hyp = strictly_below(dp, tp, tol) && strictly_below(dq, tq, tol);
    let den = 1.0 - (1.0 + k) * dp - k * dq;
    let bp = perturbed(a, p_prime, q_prime, tol);
    Ok(BoundReport::assemble(
        k,
        hyp,
        bp.as_ref().map(|r| &r.b),
        &b,
        ratio_or_inf((1.0 + k) * (dp + dq), den),
        ratio_or_inf(1.0 + dq, den),
        vec![
            aux("d_p", dp),
            aux("d_q", dq),
            aux("threshold_p", tp),
            aux("threshold_q", tq),
        ],
        tol,
    ))
}

/// Perturbing `a`, `p` and `q` together. With the hypotheses of
/// [`bound_thm38`] plus `‖b‖‖δa‖ < 2κ/((κ+1)(κ+4))`, and
/// `E = (1 + d_q)‖b‖‖δa‖`:
/// `‖b̄′‖/‖b‖ ≤ (1 + d_q)/(D − E)` and
/// `‖b̄′ − b‖/‖b‖ ≤ [(1+κ)(d_p + d_q) + (1 + d_q)²‖δa‖‖b‖/(D − E)]/D`.
pub fn bound_thm39(
    a: &Matrix,
    delta_a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    p_prime: &Idempotent,
    q_prime: &Idempotent,
    tol: &Tolerances,
) -> Result<BoundReport> {
    let (b, k) = base(a, p, q, tol)?;
    let dp = dist(p, p_prime);
    let dq = dist(q, q_prime);
    let bn = b.spectral_norm();
    let s = bn * delta_a.spectral_norm();
    let tp = 1.0 / ((1.0 + k) * (1.0 + k));
    let tq = 1.0 / (3.0 + k);
    let ta = 2.0 * k / ((k + 1.0) * (k + 4.0));
    let hyp =
        strictly_below(dp, tp, tol) && strictly_below(dq, tq, tol) && strictly_below(s, ta, tol);
    let den = 1.0 - (1.0 + k) * dp - k * dq;
    let e = (1.0 + dq) * s;
    let inner = ratio_or_inf((1.0 + dq) * (1.0 + dq) * s, den - e);
    let rhs = ratio_or_inf((1.0 + k) * (dp + dq) + inner, den);
    let a_bar = a + delta_a;
    let bp = perturbed(&a_bar, p_prime, q_prime, tol);
    Ok(BoundReport::assemble(
        k,
        hyp,
        bp.as_ref().map(|r| &r.b),
        &b,
        rhs,
        ratio_or_inf(1.0 + dq, den - e),
        vec![
            aux("d_p", dp),
            aux("d_q", dq),
            aux("b_delta_a", s),
            aux("threshold_p", tp),
            aux("threshold_q", tq),
            aux("threshold_delta_a", ta),
        ],
        tol,
    ))
}

/// Which idempotents move in [`cor_12_variants`].
#[derive(Clone, Copy, Debug)]
pub enum Cor12Variant<'a> {
    /// `p′` with `ap′ = a`.
    P(&'a Idempotent),
    /// `q′` with `(1 − q′)a = a`.
    Q(&'a Idempotent),
    /// Both side conditions.
    Both(&'a Idempotent, &'a Idempotent),
}

/// Bounds for the inner-outer inverse `a^{(1,2)}_{p,q}`, under the side
/// conditions that keep the perturbed inverse inner. The conclusion also
/// requires the perturbed inverse to satisfy all four strict equations.
/// For a moving `q`, `repr_deviation` compares `b′` with
/// `b + b(av)^# a(v − w)q` for `w = b` and `v = b′`.
pub fn cor_12_variants(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    variant: Cor12Variant<'_>,
    tol: &Tolerances,
) -> Result<BoundReport> {
    let res = compute_outer_pql(a, p, q, tol)?;
    if !res.flags.strict_12 {
        return Err(Error::NotExists);
    }
    let b = res.b;
    let thr = tol.identity_threshold(a.spectral_norm(), b.spectral_norm());
    let (pp, qp) = match variant {
        Cor12Variant::P(x) => (x, q),
        Cor12Variant::Q(y) => (p, y),
        Cor12Variant::Both(x, y) => (x, y),
    };
    if !core::ptr::eq(pp, p) && (&(a * pp.matrix()) - a).spectral_norm() > thr {
        return Err(Error::SideConditionViolated("a p' = a"));
    }
    if !core::ptr::eq(qp, q) && (&(&qp.matrix().one_minus() * a) - a).spectral_norm() > thr {
        return Err(Error::SideConditionViolated("(1 - q') a = a"));
    }
    let mut report = match variant {
        Cor12Variant::P(x) => bound_thm34(a, p, q, x, tol)?,
        Cor12Variant::Q(y) => bound_thm36(a, p, q, y, tol)?,
        Cor12Variant::Both(x, y) => bound_thm38(a, p, q, x, y, tol)?,
    };
    report.aux.retain(|x| !x.name.starts_with("repr"));
    let bp = compute_outer_pql(a, pp, qp, tol).ok();
    let strict = bp.as_ref().is_some_and(|r| r.flags.strict_12);
    report.conclusion_exists = report.conclusion_exists && strict;
    if let (Cor12Variant::Q(_), Some(bp)) = (variant, &bp) {
        let v = &bp.b;
        let dev = match group_inverse(&(a * v), tol) {
            Ok(y) => {
                let x = &b + &product(&[&b, &y, a, &(v - &b), q.matrix()]);
                relative((&x - v).spectral_norm(), v.spectral_norm())
            }
            Err(_) => f64::NAN,
        };
        report.aux.push(aux("repr_deviation", dev));
    }
    report.holds = report.evaluate(tol);
    Ok(report)
}
