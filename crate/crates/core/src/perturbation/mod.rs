//! Perturbation of `a^{(2,l)}_{p,q}` under `a ↦ ā = a + δa` and under
//! perturbation of the idempotents `p`, `q`.
//!
//! Equivalence checks return an [`EquivalenceReport`] whose conditions must
//! agree on every valid input. Sufficient-condition results return
//! [`Implication`]s, and the quantitative error bounds return
//! [`BoundReport`]s. Algebraic conditions such as `x = 0` are decided with
//! the scale-aware threshold `tol_eq·(1 + ‖ā‖)(1 + ‖b‖)²`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gen_inverse::compute_outer_pql;
use crate::idempotent::Idempotent;
use crate::linalg::{inverse_margin, try_inverse, Matrix};
use crate::subspace::{intersection_trivial, range_of, Subspace};
use crate::tol::Tolerances;

mod bounds;
mod equivalence;
mod lemmas;

pub use bounds::{
    bound_thm34, bound_thm36, bound_thm38, bound_thm39, cor_12_variants, AuxValue, BoundReport,
    Cor12Variant,
};
pub use equivalence::{
    cor_lemas1, equivalence_cor28, equivalence_thm212, equivalence_thm24, equivalence_thm27,
    equivalence_thm_tm27, gap_sufficient_lemma210, lemma26_f,
};
pub use lemmas::{lemma21_check, lemma31_check, lemma33_check, Lemma21};

/// Base data `(a, δa, p, q)` plus optional perturbed idempotents.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub a: Matrix,
    pub delta_a: Matrix,
    pub p: Idempotent,
    pub q: Idempotent,
    pub p_prime: Option<Idempotent>,
    pub q_prime: Option<Idempotent>,
    pub tol: Tolerances,
}

impl Scenario {
    pub fn new(
        a: Matrix,
        delta_a: Matrix,
        p: Idempotent,
        q: Idempotent,
        tol: Tolerances,
    ) -> Result<Self> {
        let n = a.rows();
        if !a.is_square()
            || delta_a.rows() != n
            || delta_a.cols() != n
            || p.dim() != n
            || q.dim() != n
        {
            return Err(Error::Dimension(
                "scenario matrices must share one square size",
            ));
        }
        tol.validate()?;
        Ok(Scenario {
            a,
            delta_a,
            p,
            q,
            p_prime: None,
            q_prime: None,
            tol,
        })
    }

    pub fn with_primes(
        mut self,
        p_prime: Option<Idempotent>,
        q_prime: Option<Idempotent>,
    ) -> Result<Self> {
        let n = self.n();
        if p_prime.as_ref().is_some_and(|x| x.dim() != n)
            || q_prime.as_ref().is_some_and(|x| x.dim() != n)
        {
            return Err(Error::Dimension("perturbed idempotent of the wrong size"));
        }
        self.p_prime = p_prime;
        self.q_prime = q_prime;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    /// `ā = a + δa`
    pub fn a_bar(&self) -> Matrix {
        &self.a + &self.delta_a
    }

    /// `b = a^{(2,l)}_{p,q}`.
    pub fn base_inverse(&self) -> Result<Matrix> {
        Ok(compute_outer_pql(&self.a, &self.p, &self.q, &self.tol)?.b)
    }

    /// Same scenario with `(a, δa)` replaced by `(t·a, t·δa)`.
    pub fn scaled(&self, t: f64) -> Scenario {
        Scenario {
            a: self.a.scale_real(t),
            delta_a: self.delta_a.scale_real(t),
            ..self.clone()
        }
    }
}

/// One named condition of an equivalence or implication.
#[derive(Clone, Debug, PartialEq)]
pub struct Condition {
    pub name: &'static str,
    pub holds: bool,
    /// The measured quantity behind the decision (a residual norm, a gap,
    /// or an existence margin).
    pub residual: f64,
}

impl Condition {
    pub fn new(name: &'static str, holds: bool, residual: f64) -> Self {
        Condition {
            name,
            holds,
            residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    /// Conditions that must all be true or all be false.
    pub conditions: Vec<Condition>,
    /// Conditions that must hold unconditionally.
    pub invariants: Vec<Condition>,
    pub consistent: bool,
    /// `‖formula − direct‖ / ‖direct‖` when all conditions hold.
    pub formula_residual: Option<f64>,
    pub formula_agrees: Option<bool>,
}

impl EquivalenceReport {
    pub(crate) fn build(conditions: Vec<Condition>, invariants: Vec<Condition>) -> Self {
        let first = conditions.first().map(|c| c.holds);
        let agree = conditions.iter().all(|c| Some(c.holds) == first);
        let inv_ok = invariants.iter().all(|c| c.holds);
        EquivalenceReport {
            conditions,
            invariants,
            consistent: agree && inv_ok,
            formula_residual: None,
            formula_agrees: None,
        }
    }

    pub(crate) fn with_formula(mut self, residual: f64, agrees: bool) -> Self {
        self.formula_residual = Some(residual);
        self.formula_agrees = Some(agrees);
        self.consistent = self.consistent && agrees;
        self
    }

    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }
}

/// `hypothesis ⇒ conclusion`; `violated` flags a counterexample.
#[derive(Clone, Debug, PartialEq)]
pub struct Implication {
    pub name: &'static str,
    pub hypothesis: Vec<Condition>,
    pub conclusion: Vec<Condition>,
    pub hypothesis_holds: bool,
    pub conclusion_holds: bool,
    pub violated: bool,
}

impl Implication {
    pub(crate) fn build(
        name: &'static str,
        hypothesis: Vec<Condition>,
        conclusion: Vec<Condition>,
    ) -> Self {
        let hypothesis_holds = hypothesis.iter().all(|c| c.holds);
        let conclusion_holds = conclusion.iter().all(|c| c.holds);
        Implication {
            name,
            hypothesis,
            conclusion,
            hypothesis_holds,
            conclusion_holds,
            violated: hypothesis_holds && !conclusion_holds,
        }
    }
}

/// `κ = ‖a‖·‖b‖`.
pub fn kappa(a: &Matrix, b: &Matrix) -> f64 {
    a.spectral_norm() * b.spectral_norm()
}

/// Strict hypothesis `value < threshold`, treated as false within `tol_eq`
/// of the threshold.
pub(crate) fn strictly_below(value: f64, threshold: f64, tol: &Tolerances) -> bool {
    value < threshold - tol.tol_eq
}

/// `col(ā) ∩ col(q) = {0}`.
pub fn is_stable(s: &Scenario) -> bool {
    stability(s).holds
}

pub(crate) fn stability(s: &Scenario) -> Condition {
    let col_abar = range_of(&s.a_bar(), &s.tol);
    let holds = intersection_trivial(&col_abar, s.q.range(), &s.tol).unwrap_or(false);
    Condition::new("stable", holds, intersection_margin(&col_abar, s.q.range()))
}

/// Smallest singular value of `[B_M | B_N]`: 0 when the intersection is
/// nontrivial, up to 1 for orthogonal subspaces.
pub(crate) fn intersection_margin(m: &Subspace, n: &Subspace) -> f64 {
    if m.dim() == 0 || n.dim() == 0 {
        return 1.0;
    }
    if m.dim() + n.dim() > m.ambient_dim() {
        return 0.0;
    }
    crate::linalg::Svd::new(&m.basis().hstack(n.basis())).sigma_min()
}

/// `b(1 + δa·b)⁻¹`, cross-checked against `(1 + b·δa)⁻¹b`.
pub fn update_formula(b: &Matrix, delta_a: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    let left = (delta_a * b).one_plus();
    let right = (b * delta_a).one_plus();
    let inv_l = try_inverse(&left, tol).map_err(|_| Error::NotExists)?;
    let inv_r = try_inverse(&right, tol).map_err(|_| Error::NotExists)?;
    let x1 = b * &inv_l;
    let x2 = &inv_r * b;
    let dev = (&x1 - &x2).spectral_norm();
    if dev > tol.identity_threshold(delta_a.spectral_norm(), x1.spectral_norm()) {
        return Err(Error::RepresentationMismatch(dev));
    }
    Ok(x1)
}

/// Invertibility decision and margin `σ_min/σ_max`.
pub(crate) fn invertible(m: &Matrix, tol: &Tolerances) -> Condition {
    let margin = inverse_margin(m);
    Condition::new("invertible", try_inverse(m, tol).is_ok(), margin)
}

pub(crate) fn relative(diff: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / scale
    }
}

#[cfg(test)]
pub(crate) use tests::e1_scenario;

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn e1_scenario(delta: &[f64]) -> Scenario {
        let tol = Tolerances::default();
        Scenario::new(
            Matrix::from_real_diag(&[1.0, 2.0, 0.0]),
            Matrix::from_real_diag(delta),
            Idempotent::new(Matrix::from_real_diag(&[1.0, 1.0, 0.0]), &tol).unwrap(),
            Idempotent::new(Matrix::from_real_diag(&[0.0, 0.0, 1.0]), &tol).unwrap(),
            tol,
        )
        .unwrap()
    }

    #[test]
    fn kappa_examples() {
        let s = e1_scenario(&[0.0; 3]);
        let b = s.base_inverse().unwrap();
        assert!((kappa(&s.a, &b) - 2.0).abs() < 1e-14);
        assert_eq!(kappa(&Matrix::identity(3), &Matrix::identity(3)), 1.0);
        let k = kappa(&s.a.scale_real(10.0), &b.scale_real(0.1));
        assert!((k - 2.0).abs() < 1e-13);
    }

    #[test]
    fn stability_examples() {
        assert!(is_stable(&e1_scenario(&[0.1, 0.0, 0.0])));
        assert!(!is_stable(&e1_scenario(&[0.0, 0.0, 0.1])));
        assert!(is_stable(&e1_scenario(&[0.0; 3])));
    }

    #[test]
    fn update_examples() {
        let tol = Tolerances::default();
        let b = Matrix::from_real_diag(&[1.0, 0.5, 0.0]);
        assert_eq!(update_formula(&b, &Matrix::zeros(3, 3), &tol).unwrap(), b);
        let u = update_formula(&b, &Matrix::from_real_diag(&[0.1, 0.0, 0.0]), &tol).unwrap();
        assert!(u.approx_eq(&Matrix::from_real_diag(&[1.0 / 1.1, 0.5, 0.0]), 1e-15));
        assert_eq!(
            update_formula(&b, &Matrix::from_real_diag(&[-1.0, 0.0, 0.0]), &tol),
            Err(Error::NotExists)
        );
    }
}
