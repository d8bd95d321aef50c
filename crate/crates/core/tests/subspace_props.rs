use ginv_core::idempotent::{oblique, random_idempotent};
use ginv_core::linalg::pseudo_inverse;
use ginv_core::rng::GaussianStream;
use ginv_core::subspace::{contains, gap, one_sided_gap, range_of};
use ginv_core::{Matrix, Subspace, Tolerances};
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn random_subspace(g: &mut GaussianStream, n: usize, k: usize) -> Subspace {
    Subspace::from_orthonormal(g.orthonormal(n, k))
}

/// Rank-based containment, independent of the gap formula.
fn contained_by_rank(small: &Subspace, big: &Subspace) -> bool {
    let t = tol();
    let stacked = big.basis().hstack(small.basis());
    ginv_core::linalg::rank(&stacked, &t) == big.dim()
}

/// Largest `‖(1 − P_N)x‖ / ‖x‖` over sampled `x` in the ideal of `M`, with a
/// few power steps on each sample as local refinement.
fn sampled_sup(m: &Subspace, n: &Subspace, g: &mut GaussianStream, samples: usize) -> f64 {
    let dim = m.ambient_dim();
    let comp = n.projector_matrix().one_minus();
    let r = &comp * m.basis();
    let rr = &r.adjoint() * &r;
    let mut best: f64 = 0.0;
    for s in 0..samples {
        let mut c = g.matrix(m.dim(), dim);
        let steps = if s % 10 == 0 { 3 } else { 0 };
        for _ in 0..steps {
            c = &rr * &c;
            let f = c.frobenius_norm();
            if f > 0.0 {
                c = c.scale_real(1.0 / f);
            }
        }
        let x = m.basis() * &c;
        let xn = x.spectral_norm();
        if xn == 0.0 {
            continue;
        }
        best = best.max((&comp * &x).spectral_norm() / xn);
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gap_values_and_symmetry(seed in any::<u64>(), n in 1usize..7, k1 in 0usize..7, k2 in 0usize..7) {
        let mut g = GaussianStream::new(seed, 0);
        let m = random_subspace(&mut g, n, k1.min(n));
        let nn = random_subspace(&mut g, n, k2.min(n));
        let r = gap(&m, &nn).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.delta_mn));
        prop_assert!((0.0..=1.0).contains(&r.delta_nm));
        let r2 = gap(&nn, &m).unwrap();
        prop_assert_eq!(r.gap, r2.gap);
        prop_assert!(gap(&m, &m).unwrap().gap < 1e-12);
    }

    #[test]
    fn zero_gap_iff_containment(seed in any::<u64>(), n in 2usize..7) {
        let mut g = GaussianStream::new(seed, 1);
        let big_k = 1 + (seed as usize) % (n - 1);
        let big = random_subspace(&mut g, n, big_k);
        let inside = Subspace::span(&(big.basis() * &g.matrix(big_k, 1)), &tol());
        let outside = random_subspace(&mut g, n, 1);
        prop_assert!(one_sided_gap(&inside, &big).unwrap() < 1e-12);
        prop_assert!(contained_by_rank(&inside, &big));
        let d = one_sided_gap(&outside, &big).unwrap();
        prop_assert_eq!(d <= tol().subspace_threshold(), contained_by_rank(&outside, &big));
        prop_assert_eq!(contains(&big, &outside, &tol()).unwrap(), contained_by_rank(&outside, &big));
    }

    #[test]
    fn unitary_invariance(seed in any::<u64>(), n in 1usize..7, k1 in 0usize..7, k2 in 0usize..7) {
        let mut g = GaussianStream::new(seed, 2);
        let m = random_subspace(&mut g, n, k1.min(n));
        let nn = random_subspace(&mut g, n, k2.min(n));
        let u = g.unitary(n);
        let um = Subspace::from_orthonormal(&u * m.basis());
        let un = Subspace::from_orthonormal(&u * nn.basis());
        let a = gap(&m, &nn).unwrap();
        let b = gap(&um, &un).unwrap();
        prop_assert!((a.delta_mn - b.delta_mn).abs() < 1e-12);
        prop_assert!((a.delta_nm - b.delta_nm).abs() < 1e-12);
    }

    #[test]
    fn range_gap_below_idempotent_distance(seed in any::<u64>(), n in 1usize..7, skew in 0.0f64..3.0) {
        let r1 = (seed as usize) % (n + 1);
        let r2 = (seed as usize / 7) % (n + 1);
        let p = random_idempotent(n, r1, skew, seed);
        let q = random_idempotent(n, r2, skew, seed.wrapping_add(1));
        let d = (p.matrix() - q.matrix()).spectral_norm();
        prop_assert!(gap(p.range(), q.range()).unwrap().gap <= d + 1e-12);
    }

    #[test]
    fn sampled_sup_never_exceeds_formula(seed in any::<u64>(), n in 1usize..6) {
        let mut g = GaussianStream::new(seed, 3);
        let k1 = 1 + (seed as usize) % n;
        let k2 = (seed as usize / 5) % (n + 1);
        let m = random_subspace(&mut g, n, k1);
        let nn = random_subspace(&mut g, n, k2);
        let formula = one_sided_gap(&m, &nn).unwrap();
        let s = sampled_sup(&m, &nn, &mut g, 200);
        prop_assert!(s <= formula + 1e-12);
    }
}

#[test]
fn sampled_sup_reaches_formula_small_n() {
    let mut g = GaussianStream::new(2024, 0);
    for n in 2..=4 {
        for trial in 0..3 {
            let k1 = 1 + trial % (n - 1);
            let k2 = 1 + (trial + 1) % (n - 1);
            let m = random_subspace(&mut g, n, k1);
            let nn = random_subspace(&mut g, n, k2);
            let formula = one_sided_gap(&m, &nn).unwrap();
            let s = sampled_sup(&m, &nn, &mut g, 10_000);
            assert!(s <= formula + 1e-12);
            assert!(formula - s < 1e-2, "n={n} formula={formula} sampled={s}");
        }
    }
}

#[test]
fn principal_angle_family() {
    for i in 0..=6 {
        let th = i as f64 * std::f64::consts::PI / 12.0;
        let a = range_of(&Matrix::from_real_rows(&[&[1.0], &[0.0]]), &tol());
        let b = range_of(&Matrix::from_real_rows(&[&[th.cos()], &[th.sin()]]), &tol());
        let r = gap(&a, &b).unwrap();
        assert!((r.gap - th.sin().abs()).abs() < 1e-10, "theta={th}");
    }
}

/// `x·M_n(ℂ)` is the set of matrices with columns in `col(x)`: membership by
/// solving `x y = m` agrees with subspace containment.
#[test]
fn ideal_membership_matches_column_containment() {
    let t = tol();
    let mut g = GaussianStream::new(5, 5);
    for n in 1..=3 {
        for r in 0..=n {
            let x = g.with_rank(n, r, 3.0);
            let member = &x * &g.matrix(n, n);
            let generic = g.matrix(n, n);
            for m in [&member, &generic] {
                let solvable = (&(&x * &pseudo_inverse(&x, &t)) * m).approx_eq(m, 1e-10);
                let contained = contains(&range_of(&x, &t), &range_of(m, &t), &t).unwrap();
                assert_eq!(solvable, contained, "n={n} r={r}");
            }
            assert!(contains(&range_of(&x, &t), &range_of(&member, &t), &t).unwrap());
        }
    }
}

#[test]
fn oblique_norm_grows_as_angle_closes() {
    let t = tol();
    let e1 = range_of(&Matrix::from_real_rows(&[&[1.0], &[0.0]]), &t);
    let mut last = 0.0;
    for i in 1..=8 {
        let th = std::f64::consts::FRAC_PI_2 / i as f64;
        let s = range_of(&Matrix::from_real_rows(&[&[th.cos()], &[th.sin()]]), &t);
        let nrm = oblique(&e1, &s, &t).unwrap().norm();
        assert!(nrm >= 1.0 - 1e-12);
        assert!(nrm > last);
        last = nrm;
    }
}
