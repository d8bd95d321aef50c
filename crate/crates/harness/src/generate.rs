use ginv_core::gen_inverse::compute_outer_pql;
use ginv_core::idempotent::{oblique, perturb_with_mode, random_idempotent, PerturbMode};
use ginv_core::perturbation::{kappa, Scenario};
use ginv_core::rng::GaussianStream;
use ginv_core::subspace::{direct_sum_is_all, kernel_of, range_of};
use ginv_core::{Idempotent, Matrix, Subspace, Tolerances};

use crate::checks::Theorem;
use crate::config::{BaseKind, DeltaClass, EnsembleConfig};

const ATTEMPTS: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("scenario {index} (seed {seed}): {reason}")]
pub struct GenerationFailed {
    pub index: usize,
    pub seed: u64,
    pub reason: String,
}

/// One drawn base instance with the raw material for its perturbations.
///
/// Each check asks for a [`Scenario`] via [`Generated::scenario_for`], which
/// scales `δa`, `p′` and `q′` to `fraction` of that check's own thresholds.
#[derive(Clone, Debug)]
pub struct Generated {
    pub index: usize,
    pub seed: u64,
    pub n: usize,
    pub rank: usize,
    pub base: BaseKind,
    pub class: DeltaClass,
    pub fraction: f64,
    pub a: Matrix,
    pub p: Idempotent,
    pub q: Idempotent,
    pub b: Matrix,
    pub kappa: f64,
    /// Normalized so that `‖b‖·‖dir‖ = 1`; the exact `δa` for `SingularCore`.
    delta_dir: Matrix,
    prime_seed: u64,
    mode: PerturbMode,
    tol: Tolerances,
}

fn random_complement(g: &mut GaussianStream, s: &Subspace, tol: &Tolerances) -> Subspace {
    let n = s.ambient_dim();
    for _ in 0..4 {
        let c = Subspace::from_orthonormal(g.orthonormal(n, n - s.dim()));
        if direct_sum_is_all(s, &c, tol).unwrap_or(false) {
            return c;
        }
    }
    s.orthogonal_complement(tol)
}

fn draw_base(
    g: &mut GaussianStream,
    kind: BaseKind,
    n: usize,
    r: usize,
    skew: f64,
    tol: &Tolerances,
) -> Option<(Matrix, Idempotent, Idempotent)> {
    let cond = g.uniform_range(1.0, 10.0);
    let (s1, s2) = (g.next_u64(), g.next_u64());
    match kind {
        BaseKind::Outer => {
            let ra = if r < n { g.int_range(r + 1, n) } else { n };
            let a = g.with_rank(n, ra, cond);
            Some((
                a,
                random_idempotent(n, r, skew, s1),
                random_idempotent(n, n - r, skew, s2),
            ))
        }
        BaseKind::Inner => {
            let a = g.with_rank(n, r, cond);
            Some((
                a,
                random_idempotent(n, r, skew, s1),
                random_idempotent(n, n - r, skew, s2),
            ))
        }
        BaseKind::Strict => {
            let a = g.with_rank(n, r, cond);
            let null_a = kernel_of(&a, tol);
            let col_a = range_of(&a, tol);
            let pr = random_complement(g, &null_a, tol);
            let qr = random_complement(g, &col_a, tol);
            let p = oblique(&pr, &null_a, tol).ok()?;
            let q = oblique(&qr, &col_a, tol).ok()?;
            Some((a, p, q))
        }
        BaseKind::Mixed => unreachable!("resolved by the caller"),
    }
}

fn normalized(d: Matrix, b: &Matrix) -> Matrix {
    let s = d.spectral_norm() * b.spectral_norm();
    if s > 0.0 {
        d.scale_real(1.0 / s)
    } else {
        d
    }
}

fn direction(
    g: &mut GaussianStream,
    class: DeltaClass,
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    b: &Matrix,
    tol: &Tolerances,
) -> (DeltaClass, Matrix) {
    let n = a.rows();
    match class {
        DeltaClass::StablePreserving => (class, normalized(a * &g.matrix(n, n), b)),
        DeltaClass::Strict => {
            let d = &(&q.matrix().one_minus() * &g.matrix(n, n)) * p.matrix();
            (class, normalized(d, b))
        }
        DeltaClass::Generic => (class, normalized(g.matrix(n, n), b)),
        DeltaClass::Destabilizing => {
            let null_a = kernel_of(a, tol);
            if null_a.dim() == 0 || q.rank() == 0 {
                return direction(g, DeltaClass::Generic, a, p, q, b, tol);
            }
            let x = null_a.basis() * &g.matrix(null_a.dim(), 1);
            let y = q.range().basis() * &g.matrix(q.rank(), 1);
            (class, normalized(&y * &x.adjoint(), b))
        }
        DeltaClass::SingularCore => {
            // δa = −u z*/‖z‖² with z = b u gives (1 + bδa) z = 0
            let u = g.matrix(n, 1);
            let z = b * &u;
            let zz = z.frobenius_norm().powi(2);
            if zz == 0.0 {
                return direction(g, DeltaClass::Generic, a, p, q, b, tol);
            }
            (class, (&u * &z.adjoint()).scale_real(-1.0 / zz))
        }
    }
}

/// Draws scenario `index` of the ensemble; deterministic in
/// `(config.seed, index)`.
pub fn gen_scenario(config: &EnsembleConfig, index: usize) -> Result<Generated, GenerationFailed> {
    let tol = config.tolerances();
    let mut g = GaussianStream::new(config.seed, index as u64);
    let n = g.int_range(config.n_range[0], config.n_range[1]);
    let rank = g
        .int_range(config.rank_range[0], config.rank_range[1])
        .clamp(1, n);
    let base = match config.base {
        BaseKind::Mixed => [BaseKind::Outer, BaseKind::Inner, BaseKind::Strict][index % 3],
        k => k,
    };
    let class = config.delta_classes[g.int_range(0, config.delta_classes.len() - 1)];
    let mags = &config.perturbation_magnitudes;
    let fraction = mags[g.int_range(0, mags.len() - 1)];
    for _ in 0..ATTEMPTS {
        let Some((a, p, q)) = draw_base(&mut g, base, n, rank, config.skew, &tol) else {
            continue;
        };
        let Ok(res) = compute_outer_pql(&a, &p, &q, &tol) else {
            continue;
        };
        let expected = match base {
            BaseKind::Outer => res.flags.outer_pql,
            BaseKind::Inner => res.flags.l_inverse,
            _ => res.flags.strict_12,
        };
        if !expected {
            continue;
        }
        let b = res.b;
        let k = kappa(&a, &b);
        let (class, delta_dir) = direction(&mut g, class, &a, &p, &q, &b, &tol);
        return Ok(Generated {
            index,
            seed: config.seed,
            n,
            rank,
            base,
            class,
            fraction,
            a,
            p,
            q,
            b,
            kappa: k,
            delta_dir,
            prime_seed: g.next_u64(),
            mode: config.idempotent_mode.into(),
            tol,
        });
    }
    Err(GenerationFailed {
        index,
        seed: config.seed,
        reason: format!(
            "no solvable {base:?} instance with n={n}, rank={rank} after {ATTEMPTS} attempts"
        ),
    })
}

impl Generated {
    /// `δa` with `‖b‖‖δa‖ = fraction·limit`. The singular-core direction is
    /// returned as is. Destabilizing directions satisfy `b·δa = 0`, so they
    /// are sized against `a` instead: `‖δa‖ = max(fraction, 0.05)·limit·‖a‖`
    /// (at least), which keeps the instability visible above the identity
    /// thresholds when `b` is large.
    pub fn delta(&self, limit: f64) -> Matrix {
        match self.class {
            DeltaClass::SingularCore => self.delta_dir.clone(),
            DeltaClass::Destabilizing => self
                .delta_dir
                .scale_real(self.fraction.max(0.05) * limit * self.kappa.max(1.0)),
            _ => self.delta_dir.scale_real(self.fraction * limit),
        }
    }

    fn perturb(
        &self,
        x: &Idempotent,
        limit: f64,
        salt: u64,
        mode: PerturbMode,
    ) -> Result<Idempotent, GenerationFailed> {
        perturb_with_mode(x, self.fraction * limit, self.prime_seed ^ salt, mode).map_err(|e| {
            GenerationFailed {
                index: self.index,
                seed: self.seed,
                reason: format!("perturbing an idempotent: {e}"),
            }
        })
    }

    fn scenario(&self, delta: Matrix, pp: Option<Idempotent>, qp: Option<Idempotent>) -> Scenario {
        Scenario::new(
            self.a.clone(),
            delta,
            self.p.clone(),
            self.q.clone(),
            self.tol,
        )
        .and_then(|s| s.with_primes(pp, qp))
        .expect("generated matrices share one size")
    }

    /// Scenario sized to the thresholds of `theorem`.
    pub fn scenario_for(&self, theorem: Theorem) -> Result<Scenario, GenerationFailed> {
        let k = self.kappa;
        let tp = 1.0 / ((1.0 + k) * (1.0 + k));
        let zero = || Matrix::zeros(self.n, self.n);
        let mode = if theorem.needs_kernel_preserving() {
            PerturbMode::KernelPreserving
        } else {
            self.mode
        };
        // Bound checks use a magnitude direction even for the singular class.
        let bounded_delta = |limit: f64| {
            if self.class == DeltaClass::SingularCore {
                zero()
            } else {
                self.delta_dir.scale_real(self.fraction * limit)
            }
        };
        use Theorem::*;
        Ok(match theorem {
            Defining | Repr15 | ReprGroup => self.scenario(zero(), None, None),
            Duality | UpdateFormula | KernelIdempotent | StableEquivalence
            | SubspaceEquivalence | RangeEquivalence | StrictEquivalence | GapSufficient
            | GapCorollary => self.scenario(self.delta(1.0), None, None),
            PBound | PBound12 => {
                let pp = self.perturb(&self.p, tp, 1, mode)?;
                self.scenario(zero(), Some(pp), None)
            }
            QBound | QBound12 => {
                let qp = self.perturb(&self.q, 1.0 / (2.0 + k), 2, mode)?;
                self.scenario(zero(), None, Some(qp))
            }
            PqBound | PqBound12 => {
                let pp = self.perturb(&self.p, tp, 1, mode)?;
                let qp = self.perturb(&self.q, 1.0 / (3.0 + k), 2, mode)?;
                self.scenario(zero(), Some(pp), Some(qp))
            }
            FullBound => {
                let pp = self.perturb(&self.p, tp, 1, mode)?;
                let qp = self.perturb(&self.q, 1.0 / (3.0 + k), 2, mode)?;
                let d = bounded_delta(2.0 * k / ((k + 1.0) * (k + 4.0)));
                self.scenario(d, Some(pp), Some(qp))
            }
        })
    }
}
