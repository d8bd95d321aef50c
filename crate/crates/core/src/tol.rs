use crate::error::{Error, Result};

/// Numerical thresholds shared by every decision procedure in the crate.
///
/// * `tol_rank`: singular values below `tol_rank · σ_max · max(rows, cols)`
///   are treated as zero.
/// * `tol_eq`: residual threshold for matrix identities and subspace equality.
/// * `tol_inv`: relative margin below which a matrix is reported singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub tol_rank: f64,
    pub tol_eq: f64,
    pub tol_inv: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_rank: 1e-10,
            tol_eq: 1e-9,
            tol_inv: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn new(tol_rank: f64, tol_eq: f64, tol_inv: f64) -> Result<Self> {
        let t = Tolerances {
            tol_rank,
            tol_eq,
            tol_inv,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(self.tol_rank) || !pos(self.tol_eq) || !pos(self.tol_inv) {
            return Err(Error::InvalidTolerances(
                "all tolerances must be positive and finite",
            ));
        }
        if self.tol_rank >= 1.0 {
            return Err(Error::InvalidTolerances("tol_rank must be below 1"));
        }
        Ok(())
    }

    /// Threshold for declaring an algebraic identity `X = 0` satisfied when
    /// `X` is built from products of `a` and a generalized inverse `b`.
    pub fn identity_threshold(&self, a_norm: f64, b_norm: f64) -> f64 {
        self.tol_eq * (1.0 + a_norm) * (1.0 + b_norm) * (1.0 + b_norm)
    }

    /// Subspaces whose gap is at most this are considered equal.
    pub fn subspace_threshold(&self) -> f64 {
        10.0 * self.tol_eq
    }
}
