//! Randomized invariants of the matrix toolkit, reduced models and analytics.

use cgdyn_core::analytics::{
    acf_full, acf_reduced, asymptotics_2d, error_report, scan_small_lags, uniform_grid, TwoDSpec,
};
use cgdyn_core::matcore::{
    expm_scaled, frobenius_norm, loewner_margin, matrix_function, relative_frobenius, sqrtm,
};
use cgdyn_core::model::{
    block_decompose, build_reduced, check_eigenspace_alignment, effective_matrices, normalize_map,
};
use cgdyn_core::systems::{
    build_2d, coordinate_selection_map, progressive_compare, random_orthonormal_rows, random_spd,
    ProgressiveSpec,
};
use cgdyn_core::{Approach, CoarseGrainingMap, Matrix, SymMatrix, SystemSpec, Vector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random SPD system of dimension `n_full` and a random orthonormal-row map with `n` rows.
fn random_setup(seed: u64, n_full: usize, n: usize) -> (SystemSpec, CoarseGrainingMap) {
    let mut r = rng(seed);
    let a = random_spd(n_full, 0.2, 8.0, &mut r);
    let phi = random_orthonormal_rows(n, n_full, &mut r);
    (SystemSpec::new(a, 1.3).unwrap(), normalize_map(&phi).unwrap())
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..12).prop_flat_map(|n_full| (Just(n_full), 1..n_full))
}

fn sym(m: Matrix) -> SymMatrix {
    SymMatrix::with_tolerance(m, 1e-8).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponential_semigroup(seed in any::<u64>(), n in 1usize..8, s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let a = random_spd(n, 0.1, 5.0, &mut rng(seed));
        let lhs = expm_scaled(&a, s + t).unwrap();
        let rhs = expm_scaled(&a, s).unwrap().as_matrix() * expm_scaled(&a, t).unwrap().as_matrix();
        prop_assert!(relative_frobenius(&rhs, lhs.as_matrix()) < 1e-10);
    }

    #[test]
    fn exponential_matches_general_algorithm(seed in any::<u64>(), n in 1usize..8, t in 0.0f64..3.0) {
        let a = random_spd(n, 0.1, 5.0, &mut rng(seed));
        let oracle = (a.as_matrix() * -t).exp();
        prop_assert!(relative_frobenius(expm_scaled(&a, t).unwrap().as_matrix(), &oracle) < 1e-10);
    }

    #[test]
    fn matrix_function_respects_similarity(seed in any::<u64>(), n in 1usize..8) {
        let mut r = rng(seed);
        let a = random_spd(n, 0.1, 5.0, &mut r);
        let q = random_orthonormal_rows(n, n, &mut r);
        let f = |x: f64| x.ln() + x.sqrt();
        let rotated = sym(q.transpose() * a.as_matrix() * &q);
        let lhs = matrix_function(&rotated, f).unwrap();
        let rhs = q.transpose() * matrix_function(&a, f).unwrap().as_matrix() * &q;
        prop_assert!(relative_frobenius(lhs.as_matrix(), &rhs) < 1e-10);
    }

    #[test]
    fn square_root_squares_back(seed in any::<u64>(), n in 1usize..8) {
        let a = random_spd(n, 0.01, 100.0, &mut rng(seed));
        let s = sqrtm(&a).unwrap();
        prop_assert!(relative_frobenius(&(s.as_matrix() * s.as_matrix()), a.as_matrix()) < 1e-10);
    }

    #[test]
    fn schur_identity((n_full, n) in dims(), seed in any::<u64>()) {
        let (sys, cg) = random_setup(seed, n_full, n);
        let (b, _) = effective_matrices(&block_decompose(&sys, &cg).unwrap()).unwrap();
        let a_inv = sys.a().as_matrix().clone().try_inverse().unwrap();
        let lhs = cg.phi() * a_inv * cg.phi().transpose();
        let b_inv = b.as_matrix().clone().try_inverse().unwrap();
        prop_assert!(relative_frobenius(&lhs, &b_inv) < 1e-9);
    }

    #[test]
    fn effective_matrices_are_sandwiched((n_full, n) in dims(), seed in any::<u64>()) {
        let (sys, cg) = random_setup(seed, n_full, n);
        let bd = block_decompose(&sys, &cg).unwrap();
        let (b, c) = effective_matrices(&bd).unwrap();
        let scale = frobenius_norm(sys.a());
        prop_assert!(loewner_margin(&b, &SymMatrix::zeros(n)).unwrap() > 0.0);
        prop_assert!(loewner_margin(&bd.a0, &b).unwrap() >= -1e-10 * scale);
        prop_assert!(loewner_margin(&c, &SymMatrix::zeros(n)).unwrap() > 0.0);
        prop_assert!(loewner_margin(&SymMatrix::identity(n), &c).unwrap() >= -1e-10);
    }

    #[test]
    fn statistics_do_not_depend_on_complement((n_full, n) in dims(), seed in any::<u64>()) {
        let (sys, cg) = random_setup(seed, n_full, n);
        let m = n_full - n;
        let spin = random_orthonormal_rows(m, m, &mut rng(seed ^ 0x5eed));
        let other = CoarseGrainingMap::with_complement(cg.raw(), &spin * cg.psi()).unwrap();
        let (b1, c1) = effective_matrices(&block_decompose(&sys, &cg).unwrap()).unwrap();
        let (b2, c2) = effective_matrices(&block_decompose(&sys, &other).unwrap()).unwrap();
        prop_assert!(relative_frobenius(b2.as_matrix(), b1.as_matrix()) < 1e-10);
        prop_assert!(relative_frobenius(c2.as_matrix(), c1.as_matrix()) < 1e-10);
    }

    #[test]
    fn normalization_is_idempotent((n_full, n) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let raw = Matrix::from_fn(n, n_full, |_, _| rand::Rng::random_range(&mut r, -1.0..1.0));
        let once = normalize_map(&raw).unwrap();
        let twice = normalize_map(once.phi()).unwrap();
        prop_assert!(frobenius_norm(&(once.projector() - twice.projector())) < 1e-10);
    }

    #[test]
    fn aligned_maps_collapse_the_approaches(seed in any::<u64>(), (n_full, n) in dims()) {
        let a = random_spd(n_full, 0.2, 8.0, &mut rng(seed));
        let sys = SystemSpec::new(a, 1.0).unwrap();
        // rows spanning an invariant subspace, mixed by a random rotation
        let eigvecs = sys.spectrum().eigenvectors.columns(0, n).transpose();
        let spin = random_orthonormal_rows(n, n, &mut rng(seed ^ 1));
        let cg = normalize_map(&(spin * eigvecs)).unwrap();
        prop_assert!(check_eigenspace_alignment(&sys, &cg, 1e-9).unwrap());
        let zero = Vector::zeros(n_full - n);
        let drifts: Vec<Matrix> = Approach::ALL
            .iter()
            .map(|&ap| build_reduced(&sys, &cg, ap, &zero).unwrap().drift)
            .collect();
        prop_assert!(frobenius_norm(&(&drifts[0] - &drifts[1])) < 1e-9);
        prop_assert!(frobenius_norm(&(&drifts[0] - &drifts[2])) < 1e-9);
    }

    #[test]
    fn acf_curves_are_symmetric_and_decay((n_full, n) in dims(), seed in any::<u64>()) {
        let (sys, cg) = random_setup(seed, n_full, n);
        let lags = uniform_grid(0.0, 4.0, 41);
        let full = acf_full(&sys, &cg, &lags).unwrap();
        let zero = Vector::zeros(n_full - n);
        let app1 = acf_reduced(&build_reduced(&sys, &cg, Approach::One, &zero).unwrap(), &lags).unwrap();
        let app2 = acf_reduced(&build_reduced(&sys, &cg, Approach::Two, &zero).unwrap(), &lags).unwrap();
        for curve in [&full, &app1, &app2] {
            for v in &curve.values {
                prop_assert!(frobenius_norm(&(v.as_matrix() - v.transpose())) == 0.0);
            }
            prop_assert!(loewner_margin(&curve.values[0], &SymMatrix::zeros(n)).unwrap() > 0.0);
        }
        for curve in [&full, &app1] {
            let norms: Vec<f64> = curve.values.iter().map(|v| frobenius_norm(v)).collect();
            prop_assert!(norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        }
        let same = error_report(&full, &full).unwrap();
        prop_assert!(same.abs_err.iter().chain(&same.l1_mean_abs).all(|&e| e == 0.0));
    }

    #[test]
    fn single_observable_bounds_hold(n_full in 2usize..12, seed in any::<u64>(), tau in 0.01f64..5.0) {
        // With one coarse variable the Löwner order is the scalar order and
        // Jensen's inequality holds for every convex function.
        let (sys, cg) = random_setup(seed, n_full, 1);
        let rep = cgdyn_core::analytics::check_bounds_thm_nd(&sys, &cg, &[tau], 1e-9).unwrap();
        prop_assert!(rep.all_passed(), "margins {:?}", rep.margins[0]);
    }

    #[test]
    fn two_d_closed_forms(lambda in 1.0f64..1e3, theta in -1.5f64..1.5) {
        let (sys, cg) = build_2d(TwoDSpec::new(lambda, theta).unwrap(), 1.0).unwrap();
        let (b, c) = effective_matrices(&block_decompose(&sys, &cg).unwrap()).unwrap();
        let (s2, c2) = (theta.sin().powi(2), theta.cos().powi(2));
        let b_exact = lambda / (lambda * c2 + s2);
        let c_exact = (lambda * c2 + s2).powi(2) / (lambda * lambda * c2 + s2);
        prop_assert!((b[(0, 0)] - b_exact).abs() <= 1e-12 * b_exact);
        prop_assert!((c[(0, 0)] - c_exact).abs() <= 1e-12 * c_exact);
    }

    #[test]
    fn progressive_coarsening_for_one_observable(
        seed in any::<u64>(),
        (n_full, n) in (3usize..10).prop_flat_map(|n_full| (Just(n_full), 2..n_full)),
    ) {
        let res = random_progressive(seed, n_full, n);
        for k in 0..res.full.len() {
            let (truth, mid, coarse) = (
                res.full.values[k][(0, 0)],
                res.intermediate.values[k][(0, 0)],
                res.coarsest.values[k][(0, 0)],
            );
            // nested Schur complements plus scalar Jensen
            prop_assert!(coarse <= mid + 1e-12);
            // the two gap inequalities hold exactly when the intermediate
            // model does not overestimate the truth
            let monotone = res.monotone_at(1e-9)[k];
            if mid <= truth {
                prop_assert!(monotone);
            }
        }
    }
}

fn random_progressive(seed: u64, n_full: usize, n: usize) -> cgdyn_core::systems::ProgressiveResult {
    let mut r = rng(seed);
    let a = random_spd(n_full, 0.2, 8.0, &mut r);
    let sys = SystemSpec::new(a, 1.0).unwrap();
    let inner = random_orthonormal_rows(n, n_full, &mut r);
    let outer = random_orthonormal_rows(1, n, &mut r);
    let spec = ProgressiveSpec::new(outer, inner).unwrap();
    progressive_compare(&sys, &spec, Approach::One, &uniform_grid(0.05, 5.0, 30)).unwrap()
}

/// Generic maps can break progressive monotonicity for approach 1, because
/// an intermediate model with two or more variables may overestimate.
#[test]
fn progressive_monotonicity_can_fail_for_generic_maps() {
    let broken = (0..40u64).any(|seed| {
        let res = random_progressive(seed, 4, 3);
        res.monotone_at(1e-9).iter().any(|&ok| !ok)
    });
    assert!(broken);
}

/// Matrix Jensen fails for `x·e^{-τ/x}` once two or more coarse variables
/// are kept: the function is convex but not operator convex.
#[test]
fn jensen_counterexample_with_two_observables() {
    let tau = 1.0;
    let f = |x: f64| x * (-tau / x).exp();
    let mut worst = f64::INFINITY;
    for seed in 0..50 {
        let mut r = rng(seed);
        let a = random_spd(3, 0.1, 10.0, &mut r);
        let phi = random_orthonormal_rows(2, 3, &mut r);
        let lhs = matrix_function(&sym(&phi * a.as_matrix() * phi.transpose()), f).unwrap();
        let rhs = sym(&phi * matrix_function(&a, f).unwrap().as_matrix() * phi.transpose());
        worst = worst.min(loewner_margin(&rhs, &lhs).unwrap());
    }
    assert!(worst < -1e-3, "no violation found; worst margin {worst}");
}

/// Counterpart of the failure above for the autocovariance: `R₁ ≤ R` is
/// violated for a generic two-observable map.
#[test]
fn approach_one_can_overestimate_with_two_observables() {
    let mut worst = f64::INFINITY;
    for seed in 0..30 {
        let (sys, cg) = random_setup(seed, 6, 3);
        let rep = cgdyn_core::analytics::check_bounds_thm_nd(&sys, &cg, &[0.5, 1.0, 2.0], 1e-9).unwrap();
        worst = worst.min(
            rep.margins
                .iter()
                .map(|m| m.app1_lower)
                .fold(f64::INFINITY, f64::min),
        );
    }
    assert!(worst < -1e-4, "worst margin {worst}");
}

#[test]
fn small_lag_overestimate_for_single_observable() {
    for seed in 0..20 {
        let (sys, cg) = random_setup(seed, 5, 1);
        let grid: Vec<f64> = (1..=40).map(|k| 1e-4 * k as f64).collect();
        let scan = scan_small_lags(&sys, &cg, &grid, 1e-12).unwrap();
        assert!(scan.overestimate_horizon.is_some(), "seed {seed}");
        assert!(scan.sandwich_horizon.is_some(), "seed {seed}");
    }
}

#[test]
fn tridiagonal_coordinate_maps_satisfy_progressive_bounds() {
    let sys =
        cgdyn_core::systems::build_tridiag(&cgdyn_core::systems::TridiagSpec::paper_10d(0.5), 1.0).unwrap();
    let lags = uniform_grid(0.025, 5.0, 200);
    for n in [2, 4, 6, 8] {
        let inner = coordinate_selection_map(10, &(0..n).collect::<Vec<_>>()).unwrap();
        let spec = ProgressiveSpec::new(coordinate_selection_map(n, &[0]).unwrap(), inner).unwrap();
        let res = progressive_compare(&sys, &spec, Approach::One, &lags).unwrap();
        assert!(res.monotone_at(1e-9).iter().all(|&ok| ok), "n = {n}");
    }
}

#[test]
fn long_time_prediction_accuracy_at_large_gap() {
    let lambda = 1000.0;
    let theta = 0.3;
    let (sys, cg) = build_2d(TwoDSpec::new(lambda, theta).unwrap(), 1.0).unwrap();
    let r = acf_full(&sys, &cg, &[1.0]).unwrap();
    let r1 = acf_reduced(
        &build_reduced(&sys, &cg, Approach::One, &Vector::zeros(1)).unwrap(),
        &[1.0],
    )
    .unwrap();
    let exact = error_report(&r, &r1).unwrap().rel_err[0];
    let predicted = asymptotics_2d(TwoDSpec::new(lambda, theta).unwrap(), 1.0, 1.0)
        .unwrap()
        .app1_rel_tau1;
    assert!((exact - predicted).abs() <= 5.0 / lambda);
}
