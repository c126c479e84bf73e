use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::dyson::dense_expm;
use crate::nsop::{assemble_full_matrix, CoeffMatrix, ModeOperator};
use crate::presets::{random_decay, single_shear, taylor_green_2d, taylor_green_factor};
use crate::spectral::{max_divergence, sobolev_norm, ModeLattice};

fn lat(n: usize, l: usize) -> Arc<ModeLattice> {
    Arc::new(ModeLattice::new(n, l, 1.0).unwrap())
}

#[test]
fn forward_euler_linear_decay() {
    let lat = lat(2, 3);
    let cfg = SchemeConfig::new(2, 3, 1.0, 1.0, 4);
    let shear = single_shear(&lat, 1, 0, 1.0).unwrap();
    let dt = 0.001;
    let out = forward_euler_step(&shear, dt, &cfg).unwrap();
    assert!(out.max_abs_diff(&shear.scaled(1.0 - 4.0 * PI * PI * dt)) < 1e-15);
    let zero = ModeField::zeros(lat.clone());
    assert_eq!(forward_euler_step(&zero, dt, &cfg).unwrap(), zero);

    let tg = taylor_green_2d(&lat, 1.0).unwrap();
    let cfg = SchemeConfig::new(2, 3, 0.01, 1.0, 4);
    let out = forward_euler_step(&tg, dt, &cfg).unwrap();
    assert!(out.max_abs_diff(&tg.scaled(1.0 - 8.0 * PI * PI * 0.01 * dt)) < 1e-12);
}

#[test]
fn trotter_is_exact_on_shear() {
    let lat = lat(2, 3);
    let cfg = SchemeConfig::new(2, 3, 0.7, 1.0, 4);
    let shear = single_shear(&lat, 0, 1, 1.0).unwrap();
    for dt in [1e-3, 0.1, 0.9] {
        let out = trotter_step(&shear, dt, &cfg).unwrap();
        let factor = (-4.0 * PI * PI * 0.7 * dt).exp();
        assert!(out.max_abs_diff(&shear.scaled(factor)) <= 1e-15 * factor.max(1e-300));
    }
}

#[test]
fn inviscid_trotter_is_the_euler_exponential() {
    let lat = lat(2, 2);
    let cfg = SchemeConfig::new(2, 2, 0.0, 1.0, 4);
    let v = random_decay(&lat, 1.5, 0.3, 3).unwrap();
    let dt = 0.01;
    let op = crate::nsop::EulerOperator::new(v.clone(), 1.0);
    let direct = crate::dyson::matrix_exp_action(&op, &v, dt, Default::default()).unwrap();
    assert_eq!(trotter_step(&v, dt, &cfg).unwrap(), direct);
}

#[test]
fn trotter_on_taylor_green() {
    let lat = lat(2, 3);
    let cfg = SchemeConfig::new(2, 3, 0.01, 1.0, 4);
    let tg = taylor_green_2d(&lat, 1.0).unwrap();
    let dt = 0.01;
    let out = trotter_step(&tg, dt, &cfg).unwrap();
    let expected = tg.scaled(taylor_green_factor(0.01, 1.0, dt));
    assert!(out.max_abs_diff(&expected) < dt * dt);
    let dyson = trotter_dyson_step(&tg, dt, &cfg).unwrap();
    assert!(dyson.max_abs_diff(&expected) < dt * dt);
}

#[test]
fn trotter_defect_against_frozen_flow_is_second_order() {
    let lat = lat(2, 2);
    let cfg = SchemeConfig::new(2, 2, 0.05, 1.0, 4);
    let v = random_decay(&lat, 1.5, 0.5, 11).unwrap();
    let a = assemble_full_matrix(&v, &cfg);
    let defect = |dt: f64| {
        let exact = CoeffMatrix::from_array(lat.clone(), dense_expm(&(a.data() * Complex64::new(dt, 0.0))));
        trotter_step(&v, dt, &cfg).unwrap().max_abs_diff(&exact.apply(&v))
    };
    let (d1, d2, d3) = (defect(4e-3), defect(2e-3), defect(1e-3));
    for ratio in [d1 / d2, d2 / d3] {
        assert!((3.5..4.5).contains(&ratio), "{d1:e} {d2:e} {d3:e}");
    }
}

#[test]
fn run_stage_shear_is_exact_at_every_step() {
    let lat = lat(2, 4);
    let cfg = SchemeConfig::new(2, 4, 1.0, 1.0, 5).with_stride(1);
    let shear = single_shear(&lat, 0, 1, 1.0).unwrap();
    let traj = run_stage(&shear, &cfg).unwrap();
    assert_eq!(traj.snapshots.len(), 33);
    assert_eq!(traj.diagnostics.len(), 33);
    let k = lat.index_of(&[0, 1]).unwrap();
    for snap in &traj.snapshots {
        let expected = 0.5 * (-4.0 * PI * PI * snap.t).exp();
        assert!((snap.field.get(0, k).re - expected).abs() <= 1e-12 * expected);
    }
    let margins = traj.margins();
    assert!(margins.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn snapshot_stride_keeps_first_and_last() {
    let lat = lat(2, 2);
    let cfg = SchemeConfig::new(2, 2, 0.1, 1.0, 8);
    let traj = run_stage(&taylor_green_2d(&lat, 1.0).unwrap(), &cfg).unwrap();
    assert_eq!(cfg.stride(), 4);
    assert_eq!(traj.snapshots.len(), 1 + 256 / 4);
    assert_eq!(traj.snapshots.last().unwrap().step, 256);
    let cfg = cfg.with_stride(100);
    let traj = run_stage(&taylor_green_2d(&lat, 1.0).unwrap(), &cfg).unwrap();
    let steps: Vec<usize> = traj.snapshots.iter().map(|s| s.step).collect();
    assert_eq!(steps, vec![0, 100, 200, 256]);
}

fn tg_final_error(stage: u32) -> f64 {
    let lat = lat(2, 4);
    let cfg = SchemeConfig::new(2, 4, 0.05, 0.5, stage).with_mode(StepKind::ForwardEuler);
    let tg = taylor_green_2d(&lat, 1.0).unwrap();
    let traj = run_stage(&tg, &cfg).unwrap();
    let exact = tg.scaled(taylor_green_factor(0.05, 1.0, 0.5));
    sobolev_norm(&traj.final_field().sub(&exact), 2.0).unwrap()
}

#[test]
fn forward_euler_taylor_green_is_first_order() {
    let ratio = tg_final_error(8) / tg_final_error(9);
    assert!((1.7..=2.3).contains(&ratio), "{ratio}");
}

#[test]
fn stage_doubling_errors_halve() {
    let lat = lat(2, 4);
    let tg = taylor_green_2d(&lat, 1.0).unwrap();
    let base = SchemeConfig::new(2, 4, 0.05, 0.5, 6).with_mode(StepKind::ForwardEuler);
    let runs: Vec<Trajectory> = (6..=11).map(|n| run_stage(&tg, &base.clone().with_stage(n)).unwrap()).collect();
    let errs: Vec<f64> = runs.windows(2).map(|w| stage_doubling_error(&w[0], &w[1], 2.0).unwrap()).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.7..=2.3).contains(&ratio), "{errs:?}");
    }
    assert_eq!(stage_doubling_error(&runs[0], &runs[0], 2.0).unwrap(), 0.0);
    assert!(matches!(stage_doubling_error(&runs[0], &runs[2], 2.0), Err(crate::Error::GridMismatch(_))));
}

#[test]
fn shear_doubling_error_is_roundoff() {
    let lat = lat(2, 3);
    let shear = single_shear(&lat, 0, 1, 1.0).unwrap();
    let cfg = SchemeConfig::new(2, 3, 0.3, 1.0, 3);
    let a = run_stage(&shear, &cfg).unwrap();
    let b = run_stage(&shear, &cfg.clone().with_stage(4)).unwrap();
    assert!(stage_doubling_error(&a, &b, 1.0).unwrap() < 1e-14);
    let out = run_adaptive(&shear, &cfg, AdaptiveOptions { target: 1e-12, n_max: 8, s: 2.0 }).unwrap();
    assert_eq!(out.verdict, Verdict::Converged);
    assert_eq!(out.n_used, Some(3));
}

#[test]
fn adaptive_taylor_green_converges() {
    let lat = lat(2, 4);
    let tg = taylor_green_2d(&lat, 1.0).unwrap();
    let cfg = SchemeConfig::new(2, 4, 0.05, 0.5, 6).with_mode(StepKind::ForwardEuler);
    let out = run_adaptive(&tg, &cfg, AdaptiveOptions { target: 1e-4, n_max: 16, s: 2.0 }).unwrap();
    assert_eq!(out.verdict, Verdict::Converged);
    let exact = tg.scaled(taylor_green_factor(0.05, 1.0, 0.5));
    let rel = sobolev_norm(&out.trajectory.final_field().sub(&exact), 2.0).unwrap() / sobolev_norm(&exact, 2.0).unwrap();
    assert!(rel < 1e-3, "{rel}");
    assert!(out.orders().iter().all(|o| (0.8..=1.2).contains(o)), "{:?}", out.orders());
}

#[test]
fn blow_up_is_detected() {
    let lat = lat(2, 3);
    let v = random_decay(&lat, 0.0, 50.0, 1).unwrap();
    let cfg = SchemeConfig::new(2, 3, 0.0, 1.0, 2).with_mode(StepKind::ForwardEuler);
    let traj = run_stage(&v, &cfg).unwrap();
    let div = traj.divergence.as_ref().expect("explicit Euler with huge steps must blow up");
    assert!(traj.diagnostics.last().unwrap().diverged);
    assert_eq!(traj.completed_steps, div.step);
    assert!(traj.final_field().is_diverged());
}

#[test]
fn controlled_step_zeroes_the_mean() {
    let lat = lat(2, 3);
    let v = random_decay(&lat, 1.5, 1.0, 4).unwrap();
    let cfg = SchemeConfig::new(2, 3, 0.1, 1.0, 4).with_control(Control::ExtendedZeroMode);
    let c = zero_modes(&v);
    let (out, c2) = extended_controlled_step(&v, &c, 1e-3, &cfg).unwrap();
    assert_eq!(out.zero_mode_max(), 0.0);
    // Divergence-free data produce no zero-mode Burgers forcing.
    for (a, b) in c.iter().zip(&c2) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn control_leaves_taylor_green_untouched() {
    let lat = lat(2, 4);
    let tg = taylor_green_2d(&lat, 1.0).unwrap();
    let cfg = SchemeConfig::new(2, 4, 0.05, 0.5, 6).with_stride(1);
    let plain = run_stage(&tg, &cfg).unwrap();
    let ctrl = run_stage(&tg, &cfg.clone().with_control(Control::ExtendedZeroMode)).unwrap();
    for (a, b) in plain.snapshots.iter().zip(&ctrl.snapshots) {
        assert!(a.field.max_abs_diff(&b.field) < 1e-12);
        assert_eq!(b.field.zero_mode_max(), 0.0);
    }
}

#[test]
fn rk4_is_fourth_order_on_taylor_green() {
    let lat = lat(2, 2);
    let cfg = SchemeConfig::new(2, 2, 0.05, 1.0, 4);
    let tg = taylor_green_2d(&lat, 1.0).unwrap();
    let err = |dt: f64| {
        let exact = tg.scaled(taylor_green_factor(0.05, 1.0, dt));
        rk4_step(&tg, dt, &cfg).unwrap().max_abs_diff(&exact)
    };
    let ratio = err(0.04) / err(0.02);
    assert!((28.0..36.0).contains(&ratio), "{ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn steps_preserve_divergence_and_reality(seed in any::<u64>(), kind in 0usize..3) {
        let lat = lat(2, 3);
        let mode = [StepKind::ForwardEuler, StepKind::Trotter, StepKind::TrotterDyson][kind];
        let cfg = SchemeConfig::new(2, 3, 0.05, 0.05, 4).with_mode(mode).with_stride(1);
        let h = random_decay(&lat, 1.5, 1.0, seed).unwrap();
        let traj = run_stage(&h, &cfg).unwrap();
        prop_assert!(!traj.is_diverged());
        for snap in &traj.snapshots {
            let h1 = sobolev_norm(&snap.field, 1.0).unwrap();
            prop_assert!(max_divergence(&snap.field) <= 1e-10 * (1.0 + h1));
            prop_assert!(snap.field.reality_violation() <= 1e-12);
        }
    }
}
