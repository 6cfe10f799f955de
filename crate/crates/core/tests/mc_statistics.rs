//! Statistical checks of the Euler–Maruyama ensembles against closed forms.

use cgdyn_core::analytics::{acf_full, TwoDSpec};
use cgdyn_core::mc::{sample_acf_with_errors, simulate_full, simulate_reduced, SimConfig};
use cgdyn_core::model::build_reduced;
use cgdyn_core::systems::build_2d;
use cgdyn_core::{Approach, Vector};

/// Equilibrium variance bias of an OU process with unit rate under EM.
fn variance_bias(dt: f64) -> (f64, f64) {
    let (sys, cg) = build_2d(TwoDSpec::new(2.0, 0.0).unwrap(), 1.0).unwrap();
    let model = build_reduced(&sys, &cg, Approach::One, &Vector::zeros(1)).unwrap();
    let cfg = SimConfig {
        dt,
        t_total: 2000.0,
        n_samples: 200,
        base_seed: 11,
        burn_in_fraction: 0.5,
        stride: 1,
        q0: vec![0.0],
    };
    let est = sample_acf_with_errors(&simulate_reduced(&model, &cfg).unwrap(), &[0.0]).unwrap();
    (est.curve.values[0][(0, 0)] - 1.0, est.stderr[0][(0, 0)])
}

#[test]
fn weak_order_one_in_dt() {
    let (coarse, se_c) = variance_bias(0.2);
    let (fine, se_f) = variance_bias(0.1);
    // exact EM stationary variance is 1/(1 − dt/2)
    assert!((coarse - 0.1 / 0.9).abs() < 4.0 * se_c, "bias {coarse} ± {se_c}");
    assert!((fine - 0.05 / 0.95).abs() < 4.0 * se_f, "bias {fine} ± {se_f}");
    let ratio = coarse / fine;
    assert!((1.5..=2.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn full_dynamics_acf_matches_closed_form() {
    let (sys, cg) = build_2d(TwoDSpec::new(20.0, 0.3).unwrap(), 1.0).unwrap();
    let cfg = SimConfig {
        dt: 5e-4,
        t_total: 60.0,
        n_samples: 200,
        base_seed: 2024,
        burn_in_fraction: 0.5,
        stride: 100,
        q0: vec![5.0, -4.0],
    };
    let lags: Vec<f64> = (1..=40).map(|k| 0.05 * k as f64).collect();
    let est = sample_acf_with_errors(&simulate_full(&sys, &cg, &cfg).unwrap(), &lags).unwrap();
    let exact = acf_full(&sys, &cg, &lags).unwrap();
    let within = (0..lags.len())
        .filter(|&k| {
            let err = (est.curve.values[k][(0, 0)] - exact.values[k][(0, 0)]).abs();
            err <= 3.0 * est.stderr[k][(0, 0)]
        })
        .count();
    assert!(
        within as f64 >= 0.95 * lags.len() as f64,
        "{within}/{}",
        lags.len()
    );

    // equilibrium variance at lag 0 against B⁻¹
    let var = sample_acf_with_errors(&simulate_full(&sys, &cg, &cfg).unwrap(), &[0.0]).unwrap();
    let target = acf_full(&sys, &cg, &[0.0]).unwrap().values[0][(0, 0)];
    assert!((var.curve.values[0][(0, 0)] - target).abs() <= 3.0 * var.stderr[0][(0, 0)]);
}

#[test]
fn approach_two_equals_approach_one_when_aligned() {
    let (sys, cg) = build_2d(TwoDSpec::new(5.0, 0.0).unwrap(), 1.0).unwrap();
    let cfg = SimConfig {
        dt: 1e-3,
        t_total: 5.0,
        n_samples: 4,
        base_seed: 9,
        burn_in_fraction: 0.5,
        stride: 10,
        q0: vec![1.0],
    };
    let one = simulate_reduced(
        &build_reduced(&sys, &cg, Approach::One, &Vector::zeros(1)).unwrap(),
        &cfg,
    )
    .unwrap();
    let two = simulate_reduced(
        &build_reduced(&sys, &cg, Approach::Two, &Vector::zeros(1)).unwrap(),
        &cfg,
    )
    .unwrap();
    for i in 0..cfg.n_samples {
        for (a, b) in one.path(i).iter().zip(two.path(i)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
