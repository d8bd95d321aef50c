//! Supporting facts used by the bounds, as checkable implications.

use alloc::vec;

use super::{kappa, strictly_below, Condition, Implication};
use crate::error::Result;
use crate::gen_inverse::compute_outer_pql;
use crate::idempotent::Idempotent;
use crate::linalg::{try_inverse, Matrix};
use crate::subspace::{
    direct_sum_is_all, equals, gap, intersection_trivial, kernel_of, map_subspace, range_of,
};
use crate::tol::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma21 {
    /// `1 + xy` invertible.
    pub premise: bool,
    /// `1 + yx` invertible.
    pub conclusion: bool,
    /// `‖(1 + yx)⁻¹ − (1 − y(1 + xy)⁻¹x)‖`, when both inverses exist.
    pub residual: Option<f64>,
}

/// `1 + xy` invertible ⇒ `1 + yx` invertible, with
/// `(1 + yx)⁻¹ = 1 − y(1 + xy)⁻¹x`.
pub fn lemma21_check(x: &Matrix, y: &Matrix, tol: &Tolerances) -> Lemma21 {
    let l = try_inverse(&(x * y).one_plus(), tol);
    let r = try_inverse(&(y * x).one_plus(), tol);
    let residual = match (&l, &r) {
        (Ok(l), Ok(r)) => {
            let formula = (&(y * l) * x).one_minus();
            Some((r - &formula).spectral_norm())
        }
        _ => None,
    };
    Lemma21 {
        premise: l.is_ok(),
        conclusion: r.is_ok(),
        residual,
    }
}

/// For `col(p) = col(a)` and `δ̂(col c, col a) < 1/(1 + ‖p‖)`:
/// `col(c) ∔ null(p) = ℂⁿ`.
pub fn lemma31_check(
    a: &Matrix,
    p: &Idempotent,
    c: &Matrix,
    tol: &Tolerances,
) -> Result<Implication> {
    let col_a = range_of(a, tol);
    let col_c = range_of(c, tol);
    let same = equals(p.range(), &col_a, tol)?;
    let g = gap(&col_c, &col_a)?.gap;
    let h = vec![
        Condition::new("range_p_is_range_a", same, 0.0),
        Condition::new(
            "gap_small",
            strictly_below(g, 1.0 / (1.0 + p.norm()), tol),
            g,
        ),
    ];
    let concl = vec![Condition::new(
        "complemented",
        direct_sum_is_all(&col_c, p.kernel(), tol)?,
        g,
    )];
    Ok(Implication::build("complement_stability", h, concl))
}

/// For `‖p − p′‖ < 1/(1 + κ)`:
/// `δ̂(a·col p, a·col p′) ≤ κd/(1 − (1+κ)d)` and `null(a) ∩ col(p′) = {0}`.
pub fn lemma33_check(
    a: &Matrix,
    p: &Idempotent,
    q: &Idempotent,
    p_prime: &Idempotent,
    tol: &Tolerances,
) -> Result<Implication> {
    let b = compute_outer_pql(a, p, q, tol)?.b;
    let k = kappa(a, &b);
    let d = (p.matrix() - p_prime.matrix()).spectral_norm();
    let h = vec![Condition::new(
        "d_small",
        strictly_below(d, 1.0 / (1.0 + k), tol),
        d,
    )];
    let g = gap(
        &map_subspace(a, p.range(), tol)?,
        &map_subspace(a, p_prime.range(), tol)?,
    )?
    .gap;
    let bound = k * d / (1.0 - (1.0 + k) * d);
    let trivial = intersection_trivial(&kernel_of(a, tol), p_prime.range(), tol)?;
    let concl = vec![
        Condition::new("image_gap_bounded", g <= bound + tol.tol_eq, g),
        Condition::new("kernel_meets_trivially", trivial, d),
    ];
    Ok(Implication::build("image_gap", h, concl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::idempotent::{perturb_idempotent, random_idempotent};
    use crate::rng::GaussianStream;

    #[test]
    fn lemma21_random() {
        let tol = Tolerances::default();
        let mut g = GaussianStream::new(21, 0);
        for _ in 0..20 {
            let x = g.matrix(4, 3);
            let y = g.matrix(3, 4);
            let r = lemma21_check(&x, &y, &tol);
            assert!(r.premise && r.conclusion);
            assert!(r.residual.unwrap() < 1e-10);
        }
        // 1 + xy singular ⇔ 1 + yx singular
        let x = Matrix::from_real_rows(&[&[1.0], &[0.0]]);
        let y = Matrix::from_real_rows(&[&[-1.0, 0.0]]);
        let r = lemma21_check(&x, &y, &tol);
        assert!(!r.premise && !r.conclusion);
    }

    #[test]
    fn lemma33_random() {
        let tol = Tolerances::default();
        let mut g = GaussianStream::new(33, 0);
        let a = g.well_conditioned(4, 3.0);
        let p = random_idempotent(4, 2, 0.5, 1);
        let q = random_idempotent(4, 2, 0.5, 2);
        let b = compute_outer_pql(&a, &p, &q, &tol).unwrap().b;
        let k = kappa(&a, &b);
        let pp = perturb_idempotent(&p, 0.5 / (1.0 + k), 3).unwrap();
        let r = lemma33_check(&a, &p, &q, &pp, &tol).unwrap();
        assert!(r.hypothesis_holds && !r.violated, "{:?}", r);
    }

    #[test]
    fn lemma31_example() {
        let tol = Tolerances::default();
        let a = Matrix::from_real_diag(&[1.0, 2.0, 0.0]);
        let p = Idempotent::new(Matrix::from_real_diag(&[1.0, 1.0, 0.0]), &tol).unwrap();
        let mut c = a.clone();
        c[(2, 1)] = crate::Scalar::new(0.2, 0.0);
        let r = lemma31_check(&a, &p, &c, &tol).unwrap();
        assert!(r.hypothesis_holds && r.conclusion_holds);
    }
}
