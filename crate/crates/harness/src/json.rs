//! JSON file formats.
//!
//! Complex entries are `[re, im]`. A real part is either a JSON number or a
//! decimal rational string such as `"-3/7"`; non-finite doubles are written
//! as `null`. Matrices are `{"rows": r, "cols": c, "data": [...]}` in
//! row-major order, and a subspace is the matrix of its basis columns.

use std::fmt;
use std::str::FromStr;

use ginv_core::gen_inverse::{ExistenceReport, Flags, GInvResult, Residuals};
use ginv_core::perturbation::{BoundReport, Condition, EquivalenceReport, Implication, Scenario};
use ginv_core::{ExactMatrix, ExactScalar, GapResult, Idempotent, Matrix, Scalar, Tolerances};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::InputError;

/// A double that serializes to `null` when it is not finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_none()
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Real(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN)))
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real(x)
    }
}

/// One real part of a matrix entry.
#[derive(Clone, Debug, PartialEq)]
pub enum Entry {
    Float(f64),
    Rational(BigRational),
}

impl Entry {
    pub fn to_f64(&self) -> f64 {
        match self {
            Entry::Float(x) => *x,
            Entry::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            Entry::Float(x) if x.is_finite() => {
                Some(ginv_core::linalg::exact::rational_from_f64(*x))
            }
            Entry::Float(_) => None,
            Entry::Rational(r) => Some(r.clone()),
        }
    }
}

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Entry::Float(x) => Real(*x).serialize(s),
            Entry::Rational(r) => s.serialize_str(&r.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Entry;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, a rational string like \"1/3\", or null")
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> Result<Entry, E> {
                Ok(Entry::Float(x))
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> Result<Entry, E> {
                Ok(Entry::Float(x as f64))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> Result<Entry, E> {
                Ok(Entry::Float(x as f64))
            }
            fn visit_unit<E: de::Error>(self) -> Result<Entry, E> {
                Ok(Entry::Float(f64::NAN))
            }
            fn visit_none<E: de::Error>(self) -> Result<Entry, E> {
                Ok(Entry::Float(f64::NAN))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Entry, E> {
                BigRational::from_str(v.trim())
                    .map(Entry::Rational)
                    .map_err(|_| E::custom(format!("bad rational {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[Entry; 2]>,
}

impl MatrixJson {
    fn check(&self) -> Result<(), InputError> {
        if self.data.len() != self.rows * self.cols {
            return Err(InputError::Invalid(format!(
                "matrix declares {}x{} but has {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> Result<Matrix, InputError> {
        self.check()?;
        let data = self
            .data
            .iter()
            .map(|[re, im]| Scalar::new(re.to_f64(), im.to_f64()))
            .collect();
        Matrix::new(self.rows, self.cols, data).map_err(InputError::Core)
    }

    /// Exact entries; `None` when some entry is not finite.
    pub fn to_exact(&self) -> Result<Option<ExactMatrix>, InputError> {
        self.check()?;
        let mut entries = Vec::with_capacity(self.data.len());
        for [re, im] in &self.data {
            match (re.to_rational(), im.to_rational()) {
                (Some(r), Some(i)) => entries.push(ExactScalar::new(r, i)),
                _ => return Ok(None),
            }
        }
        let cols = self.cols;
        Ok(Some(ExactMatrix::from_fn(self.rows, cols, |i, j| {
            entries[i * cols + j].clone()
        })))
    }

    pub fn is_rational(&self) -> bool {
        self.data
            .iter()
            .flatten()
            .any(|e| matches!(e, Entry::Rational(_)))
    }
}

impl From<&Matrix> for MatrixJson {
    fn from(m: &Matrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            data: m
                .data()
                .iter()
                .map(|z| [Entry::Float(z.re), Entry::Float(z.im)])
                .collect(),
        }
    }
}

impl From<&ExactMatrix> for MatrixJson {
    fn from(m: &ExactMatrix) -> Self {
        let mut data = Vec::with_capacity(m.rows() * m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let z = &m[(i, j)];
                data.push([Entry::Rational(z.re.clone()), Entry::Rational(z.im.clone())]);
            }
        }
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            data,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inv: Option<f64>,
}

impl TolJson {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        Tolerances {
            tol_rank: self.rank.unwrap_or(base.tol_rank),
            tol_eq: self.eq.unwrap_or(base.tol_eq),
            tol_inv: self.inv.unwrap_or(base.tol_inv),
        }
    }

    pub fn full(t: &Tolerances) -> Self {
        TolJson {
            rank: Some(t.tol_rank),
            eq: Some(t.tol_eq),
            inv: Some(t.tol_inv),
        }
    }
}

/// Input of `compute` and `exists`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceJson {
    pub a: MatrixJson,
    pub p: MatrixJson,
    pub q: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<TolJson>,
}

pub struct Instance {
    pub a: Matrix,
    pub p: Idempotent,
    pub q: Idempotent,
}

fn idempotent(m: &MatrixJson, name: &str, tol: &Tolerances) -> Result<Idempotent, InputError> {
    Idempotent::new(m.to_matrix()?, tol).map_err(|e| InputError::Invalid(format!("{name}: {e}")))
}

fn square(m: &MatrixJson, name: &str) -> Result<Matrix, InputError> {
    let x = m.to_matrix()?;
    if !x.is_square() {
        return Err(InputError::Invalid(format!("{name} must be square")));
    }
    Ok(x)
}

impl InstanceJson {
    pub fn parse(&self, tol: &Tolerances) -> Result<Instance, InputError> {
        let a = square(&self.a, "a")?;
        let p = idempotent(&self.p, "p", tol)?;
        let q = idempotent(&self.q, "q", tol)?;
        if p.dim() != a.rows() || q.dim() != a.rows() {
            return Err(InputError::Invalid("a, p and q differ in size".into()));
        }
        Ok(Instance { a, p, q })
    }
}

/// Input of `perturb` and `verify --in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    pub a: MatrixJson,
    pub delta_a: MatrixJson,
    pub p: MatrixJson,
    pub q: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_prime: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_prime: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<TolJson>,
}

impl ScenarioJson {
    pub fn parse(&self, tol: &Tolerances) -> Result<Scenario, InputError> {
        let a = square(&self.a, "a")?;
        let d = square(&self.delta_a, "delta_a")?;
        let p = idempotent(&self.p, "p", tol)?;
        let q = idempotent(&self.q, "q", tol)?;
        let pp = self
            .p_prime
            .as_ref()
            .map(|m| idempotent(m, "p_prime", tol))
            .transpose()?;
        let qp = self
            .q_prime
            .as_ref()
            .map(|m| idempotent(m, "q_prime", tol))
            .transpose()?;
        Scenario::new(a, d, p, q, *tol)
            .and_then(|s| s.with_primes(pp, qp))
            .map_err(InputError::Core)
    }
}

impl From<&Scenario> for ScenarioJson {
    fn from(s: &Scenario) -> Self {
        ScenarioJson {
            a: (&s.a).into(),
            delta_a: (&s.delta_a).into(),
            p: s.p.matrix().into(),
            q: s.q.matrix().into(),
            p_prime: s.p_prime.as_ref().map(|x| x.matrix().into()),
            q_prime: s.q_prime.as_ref().map(|x| x.matrix().into()),
            tolerances: Some(TolJson::full(&s.tol)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagsJson {
    pub outer_pql: bool,
    pub l_inverse: bool,
    pub strict_pq: bool,
    pub strict_12: bool,
}

impl From<&Flags> for FlagsJson {
    fn from(f: &Flags) -> Self {
        FlagsJson {
            outer_pql: f.outer_pql,
            l_inverse: f.l_inverse,
            strict_pq: f.strict_pq,
            strict_12: f.strict_12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualsJson {
    pub bab_b: Real,
    pub aba_a: Real,
    pub ba_p: Real,
    pub one_ab_q: Real,
    pub range_gap: Real,
    pub kernel_gap: Real,
}

impl From<&Residuals> for ResidualsJson {
    fn from(r: &Residuals) -> Self {
        ResidualsJson {
            bab_b: r.bab_b.into(),
            aba_a: r.aba_a.into(),
            ba_p: r.ba_p.into(),
            one_ab_q: r.one_ab_q.into(),
            range_gap: r.range_gap.into(),
            kernel_gap: r.kernel_gap.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GInvResultJson {
    pub b: MatrixJson,
    pub flags: FlagsJson,
    pub residuals: ResidualsJson,
}

impl From<&GInvResult> for GInvResultJson {
    fn from(r: &GInvResult) -> Self {
        GInvResultJson {
            b: (&r.b).into(),
            flags: (&r.flags).into(),
            residuals: (&r.residuals).into(),
        }
    }
}

/// Output of `compute --exact`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactResultJson {
    pub b: MatrixJson,
    pub bab_eq_b: bool,
    pub range_eq: bool,
    pub kernel_eq: bool,
    pub aba_eq_a: bool,
    pub ba_eq_p: bool,
    pub one_ab_eq_q: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExistenceJson {
    pub trivial_kernel_intersection: bool,
    pub direct_sum: bool,
    pub dims_compatible: bool,
    /// `null` when the core is empty.
    pub sigma_min_core: Real,
    pub threshold: Real,
    pub exists: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_check: Option<bool>,
}

impl From<&ExistenceReport> for ExistenceJson {
    fn from(r: &ExistenceReport) -> Self {
        ExistenceJson {
            trivial_kernel_intersection: r.trivial_kernel_intersection,
            direct_sum: r.direct_sum,
            dims_compatible: r.dims_compatible,
            sigma_min_core: r.sigma_min_core.into(),
            threshold: r.threshold.into(),
            exists: r.exists,
            dual_check: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapJson {
    pub delta_mn: Real,
    pub delta_nm: Real,
    pub gap: Real,
}

impl From<&GapResult> for GapJson {
    fn from(g: &GapResult) -> Self {
        GapJson {
            delta_mn: g.delta_mn.into(),
            delta_nm: g.delta_nm.into(),
            gap: g.gap.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionJson {
    pub name: String,
    pub holds: bool,
    pub residual: Real,
}

impl From<&Condition> for ConditionJson {
    fn from(c: &Condition) -> Self {
        ConditionJson {
            name: c.name.to_string(),
            holds: c.holds,
            residual: c.residual.into(),
        }
    }
}

fn conditions(cs: &[Condition]) -> Vec<ConditionJson> {
    cs.iter().map(Into::into).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceJson {
    pub conditions: Vec<ConditionJson>,
    pub invariants: Vec<ConditionJson>,
    pub consistent: bool,
    pub formula_residual: Option<Real>,
    pub formula_agrees: Option<bool>,
}

impl From<&EquivalenceReport> for EquivalenceJson {
    fn from(r: &EquivalenceReport) -> Self {
        EquivalenceJson {
            conditions: conditions(&r.conditions),
            invariants: conditions(&r.invariants),
            consistent: r.consistent,
            formula_residual: r.formula_residual.map(Real),
            formula_agrees: r.formula_agrees,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicationJson {
    pub name: String,
    pub hypothesis: Vec<ConditionJson>,
    pub conclusion: Vec<ConditionJson>,
    pub hypothesis_holds: bool,
    pub conclusion_holds: bool,
    pub violated: bool,
}

impl From<&Implication> for ImplicationJson {
    fn from(r: &Implication) -> Self {
        ImplicationJson {
            name: r.name.to_string(),
            hypothesis: conditions(&r.hypothesis),
            conclusion: conditions(&r.conclusion),
            hypothesis_holds: r.hypothesis_holds,
            conclusion_holds: r.conclusion_holds,
            violated: r.violated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundJson {
    pub kappa: Real,
    pub hypothesis_satisfied: bool,
    pub conclusion_exists: bool,
    pub lhs: Real,
    pub rhs: Real,
    pub margin: Real,
    pub norm_lhs: Real,
    pub norm_rhs: Real,
    pub holds: bool,
    pub aux: std::collections::BTreeMap<String, Real>,
}

impl From<&BoundReport> for BoundJson {
    fn from(r: &BoundReport) -> Self {
        BoundJson {
            kappa: r.kappa.into(),
            hypothesis_satisfied: r.hypothesis_satisfied,
            conclusion_exists: r.conclusion_exists,
            lhs: r.lhs.into(),
            rhs: r.rhs.into(),
            margin: r.margin.into(),
            norm_lhs: r.norm_lhs.into(),
            norm_rhs: r.norm_rhs.into(),
            holds: r.holds,
            aux: r
                .aux
                .iter()
                .map(|x| (x.name.to_string(), Real(x.value)))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubles_round_trip_bit_exact() {
        let vals = [
            0.1,
            -1.0 / 3.0,
            f64::MIN_POSITIVE,
            5e-324,
            1.7976931348623157e308,
            2.0f64.sqrt(),
            -0.0,
        ];
        let m = Matrix::from_fn(1, vals.len(), |_, j| Scalar::new(vals[j], -vals[j] * 0.7));
        let text = serde_json::to_string(&MatrixJson::from(&m)).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        let m2 = back.to_matrix().unwrap();
        for (x, y) in m.data().iter().zip(m2.data()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn rationals_round_trip_exact() {
        let text = r#"{"rows":1,"cols":2,"data":[["1/3","-2/7"],[4,"0"]]}"#;
        let m: MatrixJson = serde_json::from_str(text).unwrap();
        let e = m.to_exact().unwrap().unwrap();
        let again: MatrixJson =
            serde_json::from_str(&serde_json::to_string(&MatrixJson::from(&e)).unwrap()).unwrap();
        assert_eq!(again.to_exact().unwrap().unwrap(), e);
        assert!(m.is_rational());
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(serde_json::to_string(&Real(f64::INFINITY)).unwrap(), "null");
        let r: Real = serde_json::from_str("null").unwrap();
        assert!(r.0.is_nan());
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let m: MatrixJson = serde_json::from_str(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).unwrap();
        assert!(m.to_matrix().is_err());
        assert!(
            serde_json::from_str::<MatrixJson>(r#"{"rows":1,"cols":1,"data":[[1,0]],"x":1}"#)
                .is_err()
        );
    }
}
