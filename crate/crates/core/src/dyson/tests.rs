use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::nsop::{assemble_euler_matrix, CoeffMatrix, EulerOperator};
use crate::presets::single_shear;
use crate::spectral::{enforce_reality, ModeLattice};

fn lat() -> Arc<ModeLattice> {
    Arc::new(ModeLattice::new(2, 2, 1.0).unwrap())
}

fn random_field(lat: &Arc<ModeLattice>, seed: u64, amp: f64) -> ModeField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = ModeField::zeros(lat.clone());
    for c in f.coeffs_mut() {
        *c = Complex64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp));
    }
    enforce_reality(&f)
}

fn scaled_identity(lat: &Arc<ModeLattice>, d: f64) -> CoeffMatrix {
    let size = lat.len() * lat.dim();
    CoeffMatrix::from_array(lat.clone(), Array2::eye(size) * Complex64::new(d, 0.0))
}

/// `lim (I + M/2^k)^{2^k}`, Richardson-combined over `k` and `k+1`.
fn limit_exp(m: &Array2<Complex64>) -> Array2<Complex64> {
    let power = |k: i32| {
        let n = m.nrows();
        let mut a = Array2::<Complex64>::eye(n) + m / Complex64::new(2f64.powi(k), 0.0);
        for _ in 0..k {
            a = a.dot(&a);
        }
        a
    };
    let (a, b) = (power(14), power(15));
    b * Complex64::new(2.0, 0.0) - a
}

#[test]
fn zero_operator_is_identity() {
    let lat = lat();
    let v = random_field(&lat, 1, 1.0);
    let op = EulerOperator::new(ModeField::zeros(lat), 1.0);
    assert_eq!(matrix_exp_action(&op, &v, 3.0, ExpmOptions::default()).unwrap(), v);
}

#[test]
fn scaled_identity_exponentiates_each_coefficient() {
    let lat = lat();
    let v = random_field(&lat, 2, 1.0);
    for d in [-2.5, 0.3, 4.0] {
        let op = scaled_identity(&lat, d);
        let out = matrix_exp_action(&op, &v, 1.0, ExpmOptions { tol: 1e-13, max_terms: 200 }).unwrap();
        assert!(out.max_abs_diff(&v.scaled(d.exp())) <= 1e-13 * d.exp().max(1.0) * v.max_abs());
    }
}

#[test]
fn matches_limit_definition_on_euler_matrix() {
    let lat = lat();
    let shear = single_shear(&lat, 0, 1, 1.0).unwrap();
    let v = shear.add(&random_field(&lat, 3, 0.05));
    let e = assemble_euler_matrix(&v, 1.0);
    let t = 0.05;
    let w = random_field(&lat, 4, 1.0);
    let got = matrix_exp_action(&e, &w, t, ExpmOptions::default()).unwrap();
    let reference = CoeffMatrix::from_array(lat.clone(), limit_exp(&(e.data() * Complex64::new(t, 0.0))));
    let d = got.max_abs_diff(&reference.apply(&w));
    assert!(d < 1e-8, "{d:e} norm {}", e.norm_inf() * t);
    let dense = CoeffMatrix::from_array(lat.clone(), dense_expm(&(e.data() * Complex64::new(t, 0.0))));
    assert!(got.max_abs_diff(&dense.apply(&w)) < 1e-12);
    let free = matrix_exp_action(&EulerOperator::new(v, 1.0), &w, t, ExpmOptions::default()).unwrap();
    assert!(free.max_abs_diff(&got) < 1e-12);
}

#[test]
fn iteration_cap_is_reported() {
    let lat = lat();
    let v = random_field(&lat, 5, 1.0);
    let op = EulerOperator::new(v.clone(), 1.0);
    let err = matrix_exp_action(&op, &v, 0.01, ExpmOptions { tol: 1e-15, max_terms: 2 }).unwrap_err();
    assert!(err.to_string().contains("expm not converged"));
}

#[test]
fn cumulative_weights_reduce_to_classical_rules() {
    let w2 = cumulative_weights(2);
    assert_eq!(w2[0], vec![0.0, 0.0]);
    assert!((w2[1][0] - 0.5).abs() < 1e-15 && (w2[1][1] - 0.5).abs() < 1e-15);
    let w3 = cumulative_weights(3);
    for (got, want) in w3[2].iter().zip([1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0]) {
        assert!((got - want).abs() < 1e-14);
    }
    for q in 2..8 {
        for row in cumulative_weights(q).iter().enumerate() {
            let tj = row.0 as f64 / (q - 1) as f64;
            assert!((row.1.iter().sum::<f64>() - tj).abs() < 1e-13);
        }
    }
}

#[test]
fn constant_sampler_gives_truncated_exponential() {
    let lat = lat();
    let v = random_field(&lat, 6, 0.3);
    let op = EulerOperator::new(v.clone(), 1.0);
    let w = random_field(&lat, 7, 1.0);
    let dt = 0.05;
    let series = time_ordered_series(|_| op.clone(), 0.0, dt, &w, 3, 4).unwrap();
    let mut expected = w.clone();
    let mut term = w.clone();
    for k in 1..=3 {
        term = op.apply(&term).scaled(dt / k as f64);
        expected.axpy(1.0, &term);
    }
    assert!(series.max_abs_diff(&expected) < 1e-10);

    let zero = EulerOperator::new(ModeField::zeros(lat.clone()), 1.0);
    assert_eq!(time_ordered_series(|_| zero.clone(), 0.0, dt, &w, 3, 4).unwrap(), w);
}

#[test]
fn linear_sampler_matches_hand_integrals() {
    let lat = lat();
    let w = random_field(&lat, 8, 1.0);
    let b = 0.7;
    let out = time_ordered_series(|t| scaled_identity(&lat, t * b), 0.0, 1.0, &w, 2, 4).unwrap();
    // ∫₀¹ t₁ dt₁ = 1/2 and ∫₀¹ t₁ ∫₀^{t₁} t₂ dt₂ dt₁ = 1/8
    let factor = 1.0 + b / 2.0 + b * b / 8.0;
    assert!(out.max_abs_diff(&w.scaled(factor)) < 1e-14);
}

#[test]
fn long_series_converges_to_exponential() {
    let lat = lat();
    let v = random_field(&lat, 9, 0.3);
    let op = EulerOperator::new(v, 1.0);
    let w = random_field(&lat, 10, 1.0);
    let dt = 0.25 / op.norm_inf();
    let series = time_ordered_series(|_| op.clone(), 0.0, dt, &w, 10, 11).unwrap();
    let exact = matrix_exp_action(&op, &w, dt, ExpmOptions::default()).unwrap();
    let d = series.max_abs_diff(&exact);
    assert!(d < 1e-13, "{d:e}");
}
