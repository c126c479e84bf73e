//! Euler-type and Trotter-product time stepping on mode fields.
//!
//! A Trotter step freezes the Euler-part matrix at the start of the step,
//! applies its exponential, and then the exact viscous factor:
//! `v' = ExpDiag(δt)·exp(δt·E(v))·v`.

mod adaptive;
mod config;
mod trajectory;

use num_complex::Complex64;

use crate::dyson::{matrix_exp_action, time_ordered_series, ExpmOptions};
use crate::error::Result;
use crate::nsop::{convection, ns_rhs, symbol_table, EulerOperator};
use crate::spectral::ModeField;

pub use adaptive::{run_adaptive, stage_doubling_error, AdaptiveOptions, AdaptiveOutcome, Verdict};
pub use config::{Control, SchemeConfig, StepKind};
pub(crate) use trajectory::Monitor;
pub use trajectory::{
    run_stage, run_with, DiagnosticsRow, Divergence, Snapshot, StepContext, Trajectory,
};

pub(crate) fn expm_options(cfg: &SchemeConfig) -> ExpmOptions {
    ExpmOptions {
        tol: cfg.exp_tolerance,
        max_terms: cfg.max_exp_terms,
    }
}

fn flag_non_finite(mut v: ModeField) -> ModeField {
    if !v.is_finite() {
        v.mark_diverged();
    }
    v
}

/// `v + δt·ns_rhs(v)`.
pub fn forward_euler_step(v: &ModeField, dt: f64, cfg: &SchemeConfig) -> Result<ModeField> {
    let mut out = v.clone();
    out.axpy(dt, &ns_rhs(v, cfg)?);
    out.set_real_flag(v.real_flag());
    Ok(flag_non_finite(out))
}

/// Multiplies mode `α` of every component by `exp(ρr²·symbol(α)·δt)`.
pub fn exp_diag(v: &ModeField, dt: f64, cfg: &SchemeConfig) -> ModeField {
    let c = cfg.rho_r2() * dt;
    let factors: Vec<f64> = symbol_table(v.lattice(), cfg.nu).iter().map(|d| (c * d).exp()).collect();
    let mut out = v.clone();
    for i in 0..v.dim() {
        for (x, f) in out.component_mut(i).iter_mut().zip(&factors) {
            *x *= *f;
        }
    }
    out
}

/// One frozen-coefficient Trotter step.
pub fn trotter_step(v: &ModeField, dt: f64, cfg: &SchemeConfig) -> Result<ModeField> {
    let op = EulerOperator::new(v.clone(), cfg.rho_r());
    let y = matrix_exp_action(&op, v, dt, expm_options(cfg))?;
    Ok(flag_non_finite(exp_diag(&y, dt, cfg)))
}

/// Trotter step with the Euler-part exponential replaced by a second-order
/// time-ordered series; `E` is interpolated linearly between the step start
/// and a forward-Euler predictor.
pub fn trotter_dyson_step(v: &ModeField, dt: f64, cfg: &SchemeConfig) -> Result<ModeField> {
    let pred = forward_euler_step(v, dt, cfg)?;
    if pred.is_diverged() {
        return Ok(pred);
    }
    let scale = cfg.rho_r();
    let sampler = |t: f64| {
        let theta = t / dt;
        let mut w = v.scaled(1.0 - theta);
        w.axpy(theta, &pred);
        EulerOperator::new(w, scale)
    };
    let y = time_ordered_series(sampler, 0.0, dt, v, 2, cfg.dyson_quad_points)?;
    Ok(flag_non_finite(exp_diag(&y, dt, cfg)))
}

/// Classical four-stage Runge-Kutta step on `ns_rhs`.
pub fn rk4_step(v: &ModeField, dt: f64, cfg: &SchemeConfig) -> Result<ModeField> {
    let k1 = ns_rhs(v, cfg)?;
    let k2 = ns_rhs(&v.add(&k1.scaled(dt / 2.0)), cfg)?;
    let k3 = ns_rhs(&v.add(&k2.scaled(dt / 2.0)), cfg)?;
    let k4 = ns_rhs(&v.add(&k3.scaled(dt)), cfg)?;
    let mut out = v.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    Ok(flag_non_finite(out))
}

/// Dispatches on `cfg.mode`.
pub fn step(v: &ModeField, dt: f64, cfg: &SchemeConfig) -> Result<ModeField> {
    match cfg.mode {
        StepKind::ForwardEuler => forward_euler_step(v, dt, cfg),
        StepKind::Trotter => trotter_step(v, dt, cfg),
        StepKind::TrotterDyson => trotter_dyson_step(v, dt, cfg),
    }
}

/// Copy of `v` with every zero mode set to 0.
pub fn without_zero_modes(v: &ModeField) -> ModeField {
    let mut out = v.clone();
    let z = v.lattice().zero_index();
    for i in 0..v.dim() {
        out.set(i, z, Complex64::new(0.0, 0.0));
    }
    out
}

/// Real parts of the zero modes.
pub fn zero_modes(v: &ModeField) -> Vec<f64> {
    let z = v.lattice().zero_index();
    (0..v.dim()).map(|i| v.get(i, z).re).collect()
}

/// Controlled step on the nonzero modes with external mean flow `c`.
///
/// The configured step runs on `v` with its zero modes removed, the mean flow
/// `c` advects every mode by the phase `exp(−ρr·ik(α·c)δt)`, the zero modes of
/// the result are set to exactly 0, and `c` gains the zero-mode Burgers
/// increment `ρr·Re b_{i0}(v, v)·δt` of the pre-step field.
pub fn extended_controlled_step(v: &ModeField, c: &[f64], dt: f64, cfg: &SchemeConfig) -> Result<(ModeField, Vec<f64>)> {
    let v = without_zero_modes(v);
    let b = convection(&v, &v)?;
    let z = v.lattice().zero_index();
    let c_next: Vec<f64> = c
        .iter()
        .enumerate()
        .map(|(i, ci)| ci + cfg.rho_r() * b.get(i, z).re * dt)
        .collect();
    let mut out = step(&v, dt, cfg)?;
    apply_mean_advection(&mut out, c, dt, cfg);
    let diverged = out.is_diverged();
    let mut out = without_zero_modes(&out);
    if diverged {
        out.mark_diverged();
    }
    Ok((out, c_next))
}

fn apply_mean_advection(v: &mut ModeField, c: &[f64], dt: f64, cfg: &SchemeConfig) {
    if c.iter().all(|&x| x == 0.0) {
        return;
    }
    let lat = v.lattice().clone();
    let k = lat.wavenumber();
    for m in 0..lat.len() {
        let dot: f64 = lat.alpha(m).iter().zip(c).map(|(&a, &ci)| a as f64 * ci).sum();
        let phase = Complex64::from_polar(1.0, -cfg.rho_r() * k * dot * dt);
        for i in 0..v.dim() {
            let x = v.get(i, m) * phase;
            v.set(i, m, x);
        }
    }
}

#[cfg(test)]
mod tests;
