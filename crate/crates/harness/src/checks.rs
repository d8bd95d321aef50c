//! Per-scenario checks, addressed by behaviour-named ids.

use std::fmt;
use std::str::FromStr;

use ginv_core::gen_inverse::{
    compute_outer_pql, exists_dual_check, exists_outer_pql, outer_inverse_from_bases,
    representation_15, representation_group_12,
};
use ginv_core::idempotent::oblique;
use ginv_core::perturbation::{
    bound_thm34, bound_thm36, bound_thm38, bound_thm39, cor_12_variants, cor_lemas1,
    equivalence_cor28, equivalence_thm212, equivalence_thm24, equivalence_thm27,
    equivalence_thm_tm27, gap_sufficient_lemma210, is_stable, kappa, lemma26_f, BoundReport,
    Cor12Variant, EquivalenceReport, Implication, Scenario,
};
use ginv_core::rng::GaussianStream;
use ginv_core::subspace::{kernel_of, map_subspace, range_of};
use ginv_core::{Error, Idempotent, Matrix, Tolerances};
use serde::{Deserialize, Serialize};

use crate::InputError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    Defining,
    Duality,
    UpdateFormula,
    KernelIdempotent,
    StableEquivalence,
    SubspaceEquivalence,
    RangeEquivalence,
    StrictEquivalence,
    GapSufficient,
    GapCorollary,
    PBound,
    QBound,
    PqBound,
    FullBound,
    #[serde(rename = "p-bound-12")]
    PBound12,
    #[serde(rename = "q-bound-12")]
    QBound12,
    #[serde(rename = "pq-bound-12")]
    PqBound12,
    #[serde(rename = "repr-15")]
    Repr15,
    ReprGroup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Residuals of algebraic identities against a threshold.
    Identity,
    /// Conditions that must all agree.
    Equivalence,
    /// Hypothesis ⇒ conclusion.
    Implication,
    /// Quantitative bound `lhs ≤ rhs`.
    Bound,
}

impl Theorem {
    pub const ALL: [Theorem; 19] = [
        Theorem::Defining,
        Theorem::Duality,
        Theorem::UpdateFormula,
        Theorem::KernelIdempotent,
        Theorem::StableEquivalence,
        Theorem::SubspaceEquivalence,
        Theorem::RangeEquivalence,
        Theorem::StrictEquivalence,
        Theorem::GapSufficient,
        Theorem::GapCorollary,
        Theorem::PBound,
        Theorem::QBound,
        Theorem::PqBound,
        Theorem::FullBound,
        Theorem::PBound12,
        Theorem::QBound12,
        Theorem::PqBound12,
        Theorem::Repr15,
        Theorem::ReprGroup,
    ];

    pub fn id(self) -> &'static str {
        use Theorem::*;
        match self {
            Defining => "defining",
            Duality => "duality",
            UpdateFormula => "update-formula",
            KernelIdempotent => "kernel-idempotent",
            StableEquivalence => "stable-equivalence",
            SubspaceEquivalence => "subspace-equivalence",
            RangeEquivalence => "range-equivalence",
            StrictEquivalence => "strict-equivalence",
            GapSufficient => "gap-sufficient",
            GapCorollary => "gap-corollary",
            PBound => "p-bound",
            QBound => "q-bound",
            PqBound => "pq-bound",
            FullBound => "full-bound",
            PBound12 => "p-bound-12",
            QBound12 => "q-bound-12",
            PqBound12 => "pq-bound-12",
            Repr15 => "repr-15",
            ReprGroup => "repr-group",
        }
    }

    pub fn kind(self) -> CheckKind {
        use Theorem::*;
        match self {
            Defining | Duality | Repr15 | ReprGroup => CheckKind::Identity,
            UpdateFormula | KernelIdempotent | StableEquivalence | SubspaceEquivalence
            | RangeEquivalence | StrictEquivalence => CheckKind::Equivalence,
            GapSufficient | GapCorollary => CheckKind::Implication,
            PBound | QBound | PqBound | FullBound | PBound12 | QBound12 | PqBound12 => {
                CheckKind::Bound
            }
        }
    }

    /// The inner-outer bounds need `ap′ = a` and `(1 − q′)a = a`.
    pub fn needs_kernel_preserving(self) -> bool {
        matches!(
            self,
            Theorem::PBound12 | Theorem::QBound12 | Theorem::PqBound12
        )
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Theorem {
    type Err = InputError;
    fn from_str(s: &str) -> Result<Self, InputError> {
        Theorem::ALL
            .iter()
            .copied()
            .find(|t| t.id() == s)
            .ok_or_else(|| InputError::UnknownTheorem(s.to_string()))
    }
}

/// Result of one check on one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub theorem: Theorem,
    /// False when the scenario does not meet the check's standing
    /// assumptions (for example no inner inverse exists); nothing is counted.
    pub applicable: bool,
    pub hypothesis: bool,
    /// Bound holds, equivalence consistent, implication not violated, or
    /// identities within tolerance.
    pub ok: bool,
    #[serde(with = "real")]
    pub kappa: f64,
    #[serde(with = "real")]
    pub lhs: f64,
    #[serde(with = "real")]
    pub rhs: f64,
    /// `col(ā) ∩ col(q) = {0}`, for checks that perturb `a`.
    pub stable: Option<bool>,
    pub note: String,
}

mod real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::json::Real;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        Real(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Real::deserialize(d)?.0)
    }
}

impl Outcome {
    fn new(theorem: Theorem) -> Self {
        Outcome {
            theorem,
            applicable: true,
            hypothesis: true,
            ok: true,
            kappa: f64::NAN,
            lhs: 0.0,
            rhs: 0.0,
            stable: None,
            note: String::new(),
        }
    }

    fn not_applicable(theorem: Theorem, why: impl Into<String>) -> Self {
        Outcome {
            applicable: false,
            note: why.into(),
            ..Outcome::new(theorem)
        }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
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
}

/// Everything a check can produce besides its [`Outcome`], for the
/// single-scenario commands.
#[derive(Clone, Debug)]
pub enum Detail {
    None,
    Equivalence(EquivalenceReport),
    Implications(Vec<Implication>),
    Bound(BoundReport),
}

fn relative(diff: f64, scale: f64) -> f64 {
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

fn missing(name: &str) -> InputError {
    InputError::Invalid(format!("this check needs {name} in the scenario"))
}

fn from_equivalence(t: Theorem, s: &Scenario, r: &EquivalenceReport) -> Outcome {
    let mut o = Outcome::new(t);
    o.ok = r.consistent;
    o.stable = Some(is_stable(s));
    o.lhs = r.formula_residual.unwrap_or(0.0);
    if !r.consistent {
        let names: Vec<String> = r
            .conditions
            .iter()
            .chain(&r.invariants)
            .map(|c| format!("{}={}", c.name, c.holds))
            .collect();
        o.note = format!("inconsistent: {}", names.join(", "));
    }
    o
}

fn from_implications(t: Theorem, s: &Scenario, imps: &[Implication]) -> Outcome {
    let mut o = Outcome::new(t);
    o.hypothesis = imps.iter().any(|i| i.hypothesis_holds);
    o.ok = imps.iter().all(|i| !i.violated);
    o.stable = Some(is_stable(s));
    if let Some(v) = imps.iter().find(|i| i.violated) {
        o.note = format!("{} violated", v.name);
    }
    o
}

fn from_bound(t: Theorem, r: &BoundReport) -> Outcome {
    let mut o = Outcome::new(t);
    o.hypothesis = r.hypothesis_satisfied;
    o.ok = r.holds;
    o.kappa = r.kappa;
    o.lhs = r.lhs;
    o.rhs = r.rhs;
    if !r.holds {
        o.note = if !r.conclusion_exists {
            "perturbed inverse does not exist".into()
        } else if r.lhs > r.rhs {
            format!("relative error {:e} above bound {:e}", r.lhs, r.rhs)
        } else {
            format!("norm ratio {:e} above bound {:e}", r.norm_lhs, r.norm_rhs)
        };
    }
    o
}

/// `Ok(None)` for `NotExists`, which marks a scenario outside the check's
/// standing assumptions.
fn optional<T>(r: ginv_core::Result<T>) -> Result<Option<T>, InputError> {
    match r {
        Ok(x) => Ok(Some(x)),
        Err(Error::NotExists) => Ok(None),
        Err(e) => Err(InputError::Core(e)),
    }
}

fn defining(s: &Scenario) -> Result<Outcome, InputError> {
    let t = Theorem::Defining;
    let tol = &s.tol;
    let Some(res) = optional(compute_outer_pql(&s.a, &s.p, &s.q, tol))? else {
        return Ok(Outcome::not_applicable(t, "no outer inverse"));
    };
    let bn = res.b.spectral_norm();
    // A second computation from rotated bases must give the same matrix.
    let mut g = GaussianStream::new(0x5eed, s.n() as u64);
    let r = s.p.rank();
    let u = s.p.range().basis() * &g.unitary(r);
    let qperp = s.q.range().orthogonal_complement(tol);
    let m0 = &g.unitary(qperp.dim()) * &qperp.basis().adjoint();
    let uniq = match outer_inverse_from_bases(&s.a, &u, &m0, tol) {
        Ok(b2) => relative((&res.b - &b2).spectral_norm(), bn),
        Err(_) => f64::INFINITY,
    };
    let worst = [
        relative(res.residuals.bab_b, bn),
        res.residuals.range_gap,
        res.residuals.kernel_gap,
        uniq,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let mut o = Outcome::new(t);
    o.kappa = kappa(&s.a, &res.b);
    o.lhs = worst;
    o.rhs = tol.tol_eq;
    o.ok = worst <= tol.tol_eq;
    if !o.ok {
        o.note = format!("defining residual {worst:e}");
    }
    Ok(o)
}

/// `q̃` of the same rank as `q` whose range contains a vector of `a·col p`,
/// so that the inverse for `(a, p, q̃)` cannot exist.
pub fn engineered_q(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    tol: &Tolerances,
) -> Option<Idempotent> {
    if q.rank() == 0 {
        return None;
    }
    let image = map_subspace(a, p.range(), tol).ok()?;
    if image.dim() == 0 {
        return None;
    }
    let mut g = GaussianStream::new(0xbad, a.rows() as u64);
    let inside = image.basis().select_columns(&[0]);
    let spanning = inside.hstack(&g.matrix(a.rows(), q.rank() - 1));
    let range = range_of(&spanning, tol);
    if range.dim() != q.rank() {
        return None;
    }
    oblique(&range, &range.orthogonal_complement(tol), tol).ok()
}

/// Existence versus its dual characterization on `(a, p, q)`, `(ā, p, q)`
/// and on `(a, p, q̃)` with `col q̃` forced to meet `a·col p`.
fn duality(s: &Scenario) -> Result<Outcome, InputError> {
    let tol = &s.tol;
    let a_bar = s.a_bar();
    let mut cases: Vec<(&str, Matrix, Idempotent)> = vec![
        ("base", s.a.clone(), s.q.clone()),
        ("perturbed", a_bar, s.q.clone()),
    ];
    if let Some(q_bad) = engineered_q(&s.a, &s.p, &s.q, tol) {
        cases.push(("engineered", s.a.clone(), q_bad));
    }
    let mut o = Outcome::new(Theorem::Duality);
    let mut bad = Vec::new();
    for (name, a, q) in &cases {
        let direct = exists_outer_pql(a, &s.p, q, tol)?.exists;
        let dual = exists_dual_check(a, &s.p, q, tol)?;
        if direct != dual {
            bad.push(format!("{name}: direct={direct} dual={dual}"));
        }
    }
    o.lhs = bad.len() as f64;
    o.ok = bad.is_empty();
    o.note = bad.join("; ");
    Ok(o)
}

fn update_formula_check(s: &Scenario) -> Result<Outcome, InputError> {
    let r = equivalence_thm24(s)?;
    let mut o = from_equivalence(Theorem::UpdateFormula, s, &r);
    o.rhs = 10.0 * s.tol.tol_eq;
    if let Some(res) = r.formula_residual {
        if res > o.rhs {
            o.ok = false;
            o.note = format!("update formula off by {res:e}");
        }
    }
    Ok(o)
}

/// `Err(outcome)` when the inner-outer bound does not apply.
fn bound_12(
    t: Theorem,
    s: &Scenario,
    variant: Cor12Variant<'_>,
) -> Result<Result<BoundReport, Outcome>, InputError> {
    match cor_12_variants(&s.a, &s.p, &s.q, variant, &s.tol) {
        Ok(r) => Ok(Ok(r)),
        Err(Error::NotExists) => Ok(Err(Outcome::not_applicable(
            t,
            "base inverse is not inner-outer strict",
        ))),
        Err(Error::SideConditionViolated(c)) => Ok(Err(Outcome::not_applicable(
            t,
            format!("side condition {c} fails"),
        ))),
        Err(e) => Err(e.into()),
    }
}

/// Runs `theorem` on `s`. Bound right-hand sides are divided by
/// `rhs_divisor`.
pub fn run_check(
    theorem: Theorem,
    s: &Scenario,
    rhs_divisor: f64,
) -> Result<(Outcome, Detail), InputError> {
    use Theorem::*;
    let na = |why: &str| Ok((Outcome::not_applicable(theorem, why), Detail::None));
    let bound = |r: BoundReport| {
        let r = r.rescaled(rhs_divisor, &s.tol);
        Ok((from_bound(theorem, &r), Detail::Bound(r)))
    };
    let mut out = match theorem {
        Defining => (defining(s)?, Detail::None),
        Duality => (duality(s)?, Detail::None),
        UpdateFormula => (update_formula_check(s)?, Detail::None),
        KernelIdempotent => match optional(lemma26_f(s))? {
            Some((_, r)) => (from_equivalence(theorem, s, &r), Detail::Equivalence(r)),
            None => return na("1 + b·δa is singular"),
        },
        StableEquivalence | SubspaceEquivalence | RangeEquivalence | StrictEquivalence => {
            let r = match theorem {
                StableEquivalence => optional(equivalence_thm27(s))?,
                SubspaceEquivalence => optional(equivalence_cor28(s))?,
                RangeEquivalence => optional(equivalence_thm_tm27(s))?,
                _ => optional(equivalence_thm212(s))?,
            };
            match r {
                Some(r) => (from_equivalence(theorem, s, &r), Detail::Equivalence(r)),
                None => return na("standing assumptions fail"),
            }
        }
        GapSufficient | GapCorollary => {
            let r = if theorem == GapSufficient {
                optional(gap_sufficient_lemma210(s))?
            } else {
                optional(cor_lemas1(s))?
            };
            match r {
                Some(v) => (from_implications(theorem, s, &v), Detail::Implications(v)),
                None => return na("no inner inverse"),
            }
        }
        PBound => {
            let pp = s.p_prime.as_ref().ok_or_else(|| missing("p_prime"))?;
            return bound(bound_thm34(&s.a, &s.p, &s.q, pp, &s.tol)?);
        }
        QBound => {
            let qp = s.q_prime.as_ref().ok_or_else(|| missing("q_prime"))?;
            return bound(bound_thm36(&s.a, &s.p, &s.q, qp, &s.tol)?);
        }
        PqBound => {
            let pp = s.p_prime.as_ref().ok_or_else(|| missing("p_prime"))?;
            let qp = s.q_prime.as_ref().ok_or_else(|| missing("q_prime"))?;
            return bound(bound_thm38(&s.a, &s.p, &s.q, pp, qp, &s.tol)?);
        }
        FullBound => {
            let pp = s.p_prime.as_ref().ok_or_else(|| missing("p_prime"))?;
            let qp = s.q_prime.as_ref().ok_or_else(|| missing("q_prime"))?;
            return bound(bound_thm39(&s.a, &s.delta_a, &s.p, &s.q, pp, qp, &s.tol)?);
        }
        PBound12 | QBound12 | PqBound12 => {
            let variant = match theorem {
                PBound12 => Cor12Variant::P(s.p_prime.as_ref().ok_or_else(|| missing("p_prime"))?),
                QBound12 => Cor12Variant::Q(s.q_prime.as_ref().ok_or_else(|| missing("q_prime"))?),
                _ => Cor12Variant::Both(
                    s.p_prime.as_ref().ok_or_else(|| missing("p_prime"))?,
                    s.q_prime.as_ref().ok_or_else(|| missing("q_prime"))?,
                ),
            };
            match bound_12(theorem, s, variant)? {
                Ok(r) => return bound(r),
                Err(o) => (o, Detail::None),
            }
        }
        Repr15 => {
            let mut o = Outcome::new(theorem);
            o.rhs = s.tol.tol_eq;
            match representation_15(&s.a, &s.p, &s.q, &s.tol) {
                Ok(r) => {
                    o.lhs = relative(r.max_deviation, r.direct.spectral_norm());
                    o.ok = o.lhs <= o.rhs;
                }
                Err(Error::NotExists) => return na("no outer inverse"),
                Err(e) => {
                    o.ok = false;
                    o.lhs = f64::INFINITY;
                    o.note = e.to_string();
                }
            }
            (o, Detail::None)
        }
        ReprGroup => {
            let Some(base) = optional(compute_outer_pql(&s.a, &s.p, &s.q, &s.tol))? else {
                return na("no outer inverse");
            };
            if !base.flags.l_inverse {
                return na("base inverse is not inner");
            }
            let mut o = Outcome::new(theorem);
            o.rhs = s.tol.tol_eq;
            let w = group_witness(&s.a, &base.b, &s.tol);
            match representation_group_12(&s.a, &w, &s.tol) {
                Ok(r) => {
                    let bn = r.b.spectral_norm();
                    let dev = (&r.b - &base.b).spectral_norm();
                    o.lhs = r
                        .residuals
                        .iter()
                        .copied()
                        .chain([r.deviation, dev])
                        .map(|x| relative(x, bn.max(1.0)))
                        .fold(0.0, f64::max);
                    o.ok = o.lhs <= o.rhs;
                }
                Err(e) => {
                    o.ok = false;
                    o.lhs = f64::INFINITY;
                    o.note = e.to_string();
                }
            }
            (o, Detail::None)
        }
    };
    if out.0.kappa.is_nan() {
        if let Ok(b) = s.base_inverse() {
            out.0.kappa = kappa(&s.a, &b);
        }
    }
    Ok(out)
}

/// A witness with `wa = p` and `aw = 1 − q` other than `b` itself:
/// `b + z` where `z` vanishes on `col a` and maps into `null a`.
fn group_witness(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Matrix {
    let right = kernel_of(a, tol);
    let left = kernel_of(&a.adjoint(), tol);
    if right.is_zero() || left.is_zero() {
        return b.clone();
    }
    let mut g = GaussianStream::new(0x3a7, a.rows() as u64);
    let core = g.matrix(right.dim(), left.dim());
    let scale = b.spectral_norm().max(1.0) / core.spectral_norm().max(f64::MIN_POSITIVE);
    let z = &(right.basis() * &core) * &left.basis().adjoint();
    b + &z.scale_real(scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1(delta: &[f64]) -> Scenario {
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
    fn ids_round_trip() {
        for t in Theorem::ALL {
            assert_eq!(t.id().parse::<Theorem>().unwrap(), t);
            let json = serde_json::to_string(&t).unwrap();
            assert_eq!(json, format!("\"{}\"", t.id()));
        }
        assert!("thm9.9".parse::<Theorem>().is_err());
    }

    #[test]
    fn e1_identity_checks_pass() {
        let s = e1(&[0.1, 0.0, 0.0]);
        for t in [
            Theorem::Defining,
            Theorem::Duality,
            Theorem::UpdateFormula,
            Theorem::StableEquivalence,
            Theorem::StrictEquivalence,
            Theorem::Repr15,
            Theorem::ReprGroup,
        ] {
            let (o, _) = run_check(t, &s, 1.0).unwrap();
            assert!(o.applicable && o.ok, "{t}: {o:?}");
        }
    }

    #[test]
    fn e1_unstable_is_consistent() {
        let s = e1(&[0.0, 0.0, 0.1]);
        let (o, _) = run_check(Theorem::StableEquivalence, &s, 1.0).unwrap();
        assert!(o.ok);
        assert_eq!(o.stable, Some(false));
    }

    #[test]
    fn bound_needs_primes() {
        assert!(run_check(Theorem::PBound, &e1(&[0.0; 3]), 1.0).is_err());
    }

    #[test]
    fn injected_divisor_breaks_bound() {
        let s = e1(&[0.0; 3]);
        let pp = ginv_core::idempotent::perturb_idempotent(&s.p, 0.05, 3).unwrap();
        let s = s.with_primes(Some(pp), None).unwrap();
        let (o, _) = run_check(Theorem::PBound, &s, 1.0).unwrap();
        assert!(o.hypothesis && o.ok && o.lhs > 1e-3);
        let (o, _) = run_check(Theorem::PBound, &s, 1e6).unwrap();
        assert!(o.hypothesis && !o.ok);
    }
}
