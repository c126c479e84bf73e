//! Global iteration on the linearized mode system
//! `dw/dt = ρr²·diag(symbol)·w + E(v^{m−1}(t))·w`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyson::matrix_exp_action;
use crate::error::{Error, Result};
use crate::nsop::{EulerOperator, ModeOperator};
use crate::presets::random_decay;
use crate::spectral::{sobolev_distance, sobolev_norm, ModeField};
use crate::stepper::{
    exp_diag, expm_options, run_with, without_zero_modes, Control, SchemeConfig, StepKind, Trajectory,
};

/// Exponentially time-weighted norm `sup_t exp(−C t)·|w(t)|_{h^s}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormSpec {
    pub s: f64,
    pub c_weight: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl WeightedNormSpec {
    pub fn new(s: f64, c_weight: f64, horizon: f64) -> Result<Self> {
        if !(c_weight >= 0.0 && c_weight.is_finite()) {
            return Err(Error::param("c_weight", format!("must be non-negative, got {c_weight}")));
        }
        if !(horizon > 0.0) {
            return Err(Error::param("T", format!("must be positive, got {horizon}")));
        }
        Ok(WeightedNormSpec { s, c_weight, horizon })
    }

    fn weight(&self, t: f64) -> f64 {
        (-self.c_weight * t).exp()
    }

    fn covers(&self, t: f64) -> bool {
        t <= self.horizon * (1.0 + 1e-12)
    }
}

pub fn weighted_norm(traj: &Trajectory, spec: &WeightedNormSpec) -> Result<f64> {
    let mut worst = 0.0f64;
    for snap in traj.snapshots.iter().filter(|s| spec.covers(s.t)) {
        worst = worst.max(spec.weight(snap.t) * sobolev_norm(&snap.field, spec.s)?);
    }
    Ok(worst)
}

/// Weighted norm of `a − b`; both runs must share their snapshot steps.
pub fn weighted_distance(a: &Trajectory, b: &Trajectory, spec: &WeightedNormSpec) -> Result<f64> {
    if a.snapshots.len() != b.snapshots.len() {
        return Err(Error::GridMismatch(format!(
            "{} and {} snapshots",
            a.snapshots.len(),
            b.snapshots.len()
        )));
    }
    let mut worst = 0.0f64;
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        if x.step != y.step {
            return Err(Error::GridMismatch(format!("snapshot steps {} and {} differ", x.step, y.step)));
        }
        if spec.covers(x.t) {
            worst = worst.max(spec.weight(x.t) * sobolev_distance(&x.field, &y.field, spec.s)?);
        }
    }
    Ok(worst)
}

fn linear_step(op: &EulerOperator, w: &ModeField, dt: f64, cfg: &SchemeConfig) -> Result<ModeField> {
    let mut out = match cfg.mode {
        StepKind::ForwardEuler => {
            let mut out = linear_euler(op, w, dt, cfg);
            out.set_real_flag(w.real_flag());
            out
        }
        StepKind::Trotter | StepKind::TrotterDyson => {
            let y = matrix_exp_action(op, w, dt, expm_options(cfg))?;
            exp_diag(&y, dt, cfg)
        }
    };
    if cfg.control == Control::ExtendedZeroMode {
        out = without_zero_modes(&out);
    }
    if !out.is_finite() {
        out.mark_diverged();
    }
    Ok(out)
}

fn linear_euler(op: &EulerOperator, w: &ModeField, dt: f64, cfg: &SchemeConfig) -> ModeField {
    let sym = crate::nsop::symbol_table(w.lattice(), cfg.nu);
    let mut out = w.clone();
    out.axpy(dt, &op.apply(w));
    let c = cfg.rho_r2() * dt;
    for i in 0..w.dim() {
        let src = w.component(i);
        for ((o, x), d) in out.component_mut(i).iter_mut().zip(src).zip(&sym) {
            *o += x * (c * d);
        }
    }
    out
}

fn solve_with<'a, F>(coeff_at: F, h: &ModeField, cfg: &SchemeConfig) -> Result<Trajectory>
where
    F: Fn(f64) -> &'a ModeField,
{
    let controlled = cfg.control == Control::ExtendedZeroMode;
    let mut cached: Option<(&ModeField, EulerOperator)> = None;
    run_with(h, cfg, |w, ctx| {
        let c = coeff_at(ctx.t);
        if cached.as_ref().map_or(true, |(k, _)| !std::ptr::eq(*k, c)) {
            let coeff = if controlled { without_zero_modes(c) } else { c.clone() };
            cached = Some((c, EulerOperator::new(coeff, ctx.config.rho_r())));
        }
        let (_, op) = cached.as_ref().expect("operator cached above");
        linear_step(op, w, ctx.dt, ctx.config)
    })
}

/// Integrates the linear system with coefficients taken piecewise constant
/// (left) from the snapshots of `coeff`.
///
/// The step kind follows `cfg.mode`; with piecewise-constant coefficients the
/// Dyson step coincides with the Trotter step. With zero-mode control the
/// zero modes of data, coefficients and iterates are held at 0.
pub fn solve_linearized(coeff: &Trajectory, h: &ModeField, cfg: &SchemeConfig) -> Result<Trajectory> {
    if coeff.is_diverged() {
        return Err(Error::Domain("coefficient trajectory diverged".into()));
    }
    if coeff.final_time() < cfg.horizon * (1.0 - 1e-12) {
        return Err(Error::GridMismatch(format!(
            "coefficients cover [0, {}] but the horizon is {}",
            coeff.final_time(),
            cfg.horizon
        )));
    }
    h.ensure_same_lattice(coeff.initial())?;
    let snaps = &coeff.snapshots;
    let slack = 1e-9 * cfg.dt();
    solve_with(
        |t| {
            let k = snaps.partition_point(|s| s.t <= t + slack);
            &snaps[k.saturating_sub(1)].field
        },
        h,
        cfg,
    )
}

/// Linear solve with coefficients frozen at `h`.
pub fn solve_frozen(h: &ModeField, cfg: &SchemeConfig) -> Result<Trajectory> {
    solve_with(|_| h, h, cfg)
}

#[derive(Clone, Debug)]
pub struct PicardOutcome {
    pub trajectory: Trajectory,
    /// Weighted distances between successive iterates.
    pub distances: Vec<f64>,
    /// `distances[m+1] / distances[m]`.
    pub ratios: Vec<f64>,
    /// Number of linear solves after the frozen start.
    pub iterations: usize,
    pub converged: bool,
}

/// Picard iteration `v^m = solve_linearized(v^{m−1}, h)` from `v^0` with
/// coefficients frozen at `h`.
///
/// Every iterate keeps a snapshot per step. Stops once the weighted distance
/// between successive iterates drops below `tol`. Reaching `max_iter` with a
/// ratio of at least 1 is an error; slower contraction is returned with
/// `converged == false`.
pub fn picard_iterate(
    h: &ModeField,
    cfg: &SchemeConfig,
    spec: &WeightedNormSpec,
    max_iter: usize,
    tol: f64,
) -> Result<PicardOutcome> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    if max_iter == 0 {
        return Err(Error::param("max_iter", "must be at least 1"));
    }
    let cfg = cfg.clone().with_stride(1);
    let mut prev = solve_frozen(h, &cfg)?;
    let mut distances: Vec<f64> = Vec::new();
    let mut ratios = Vec::new();
    for it in 1..=max_iter {
        if prev.is_diverged() {
            return Err(Error::Domain(format!("Picard iterate {} diverged", it - 1)));
        }
        let next = solve_linearized(&prev, h, &cfg)?;
        if next.is_diverged() {
            return Err(Error::Domain(format!("Picard iterate {it} diverged")));
        }
        let d = weighted_distance(&prev, &next, spec)?;
        if let Some(&last) = distances.last() {
            ratios.push(if last > 0.0 { d / last } else { 0.0 });
        }
        distances.push(d);
        if d < tol {
            return Ok(PicardOutcome {
                trajectory: next,
                distances,
                ratios,
                iterations: it,
                converged: true,
            });
        }
        prev = next;
    }
    if ratios.is_empty() || ratios.iter().any(|&r| r >= 1.0) {
        return Err(Error::NoContraction {
            iterations: max_iter,
            ratios,
        });
    }
    Ok(PicardOutcome {
        trajectory: prev,
        distances,
        ratios,
        iterations: max_iter,
        converged: false,
    })
}

/// Surrogate Lipschitz constant: the largest `|E(h)w|_{h^s} / |w|_{h^s}`
/// over `probes` seeded random divergence-free fields `w`.
pub fn lipschitz_surrogate(h: &ModeField, s: f64, cfg: &SchemeConfig, probes: usize, seed: u64) -> Result<f64> {
    use rand::Rng;
    let op = EulerOperator::new(h.clone(), cfg.rho_r());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let w = random_decay(h.lattice(), 0.0, 1.0, rng.gen())?;
        let norm = sobolev_norm(&w, s)?;
        if norm > 0.0 {
            worst = worst.max(sobolev_norm(&op.apply(&w), s)? / norm);
        }
    }
    Ok(worst)
}
