use ginv_core::idempotent::PerturbMode;
use ginv_core::Tolerances;
use serde::{Deserialize, Serialize};

use crate::checks::Theorem;
use crate::json::TolJson;
use crate::InputError;

/// How the unperturbed `(a, p, q)` is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    /// `rank a > rank p`: the inverse is outer only.
    Outer,
    /// `null a ∔ col p = ℂⁿ` and `col a ∔ col q = ℂⁿ` with random kernels.
    Inner,
    /// `null p = null a` and `null q = col a`, so `ba = p` and `ab = 1 − q`.
    Strict,
    /// Cycles through the three kinds by scenario index.
    Mixed,
}

/// Direction of `δa`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaClass {
    /// `a·h`: `col ā ⊆ col a`.
    StablePreserving,
    /// `(1 − q)·g·p`.
    Strict,
    /// Gaussian.
    Generic,
    /// `y·x*` with `x ∈ null a`, `y ∈ col q`.
    Destabilizing,
    /// Makes `1 + b·δa` exactly singular; no magnitude.
    SingularCore,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdempotentMode {
    General,
    KernelPreserving,
}

impl From<IdempotentMode> for PerturbMode {
    fn from(m: IdempotentMode) -> Self {
        match m {
            IdempotentMode::General => PerturbMode::General,
            IdempotentMode::KernelPreserving => PerturbMode::KernelPreserving,
        }
    }
}

/// Ensemble description. Missing fields take the defaults below.
///
/// `perturbation_magnitudes` are fractions of each check's own threshold:
/// `0.5` puts `‖p − p′‖` at half of the bound's limit for `p`, and for the
/// equivalence checks sets `‖b‖‖δa‖ = 0.5`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    /// Inclusive.
    pub n_range: [usize; 2],
    /// Inclusive; clamped to `1..=n` per draw.
    pub rank_range: [usize; 2],
    pub skew: f64,
    pub perturbation_magnitudes: Vec<f64>,
    pub count: usize,
    pub seed: u64,
    pub theorems: Vec<String>,
    pub tolerances: TolJson,
    pub base: BaseKind,
    pub delta_classes: Vec<DeltaClass>,
    pub idempotent_mode: IdempotentMode,
    /// Every bound right-hand side is divided by this. Values above 1 inject
    /// a false bound for self-testing.
    pub rhs_divisor: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            n_range: [2, 8],
            rank_range: [1, 7],
            skew: 0.5,
            perturbation_magnitudes: vec![0.0, 0.1, 0.3, 0.5, 0.7, 0.9],
            count: 100,
            seed: 0,
            theorems: Theorem::ALL.iter().map(|t| t.id().to_string()).collect(),
            tolerances: TolJson::default(),
            base: BaseKind::Mixed,
            delta_classes: vec![
                DeltaClass::StablePreserving,
                DeltaClass::Generic,
                DeltaClass::Destabilizing,
            ],
            idempotent_mode: IdempotentMode::General,
            rhs_divisor: 1.0,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<(), InputError> {
        let bad = |m: &str| Err(InputError::Invalid(m.to_string()));
        let [n_lo, n_hi] = self.n_range;
        let [r_lo, r_hi] = self.rank_range;
        if n_lo < 2 || n_lo > n_hi {
            return bad("n_range must be [lo, hi] with 2 <= lo <= hi");
        }
        if r_lo > r_hi || r_hi > n_hi {
            return bad("rank_range must be nonempty and within [0, n]");
        }
        if self.count == 0 {
            return bad("count must be at least 1");
        }
        if !(self.skew.is_finite() && self.skew >= 0.0) {
            return bad("skew must be finite and nonnegative");
        }
        if self.perturbation_magnitudes.is_empty()
            || self
                .perturbation_magnitudes
                .iter()
                .any(|m| !(m.is_finite() && (0.0..1.0).contains(m)))
        {
            return bad("perturbation_magnitudes must be fractions in [0, 1)");
        }
        if self.delta_classes.is_empty() {
            return bad("delta_classes must not be empty");
        }
        if !(self.rhs_divisor.is_finite() && self.rhs_divisor > 0.0) {
            return bad("rhs_divisor must be positive");
        }
        if self.theorems.is_empty() {
            return bad("theorems must not be empty");
        }
        self.theorem_list()?;
        self.tolerances().validate()?;
        Ok(())
    }

    pub fn theorem_list(&self) -> Result<Vec<Theorem>, InputError> {
        self.theorems.iter().map(|s| s.parse()).collect()
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.apply(Tolerances::default())
    }
}
