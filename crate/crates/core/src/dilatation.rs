//! Time-dilatation comparison functions and the `(ρ, r)` scaling algebra.
//!
//! On a segment `[t0, t0 + a]` the comparison function is
//! `u(τ) = v(t(τ)) / (λ·(1 + μ·(t − t0)))` (local) or with `1 + μ·t`
//! (global), where `τ = (t − t0)/√(1 − (t − t0)²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nsop::{projected_nonlinear, symbol_table};
use crate::spectral::ModeField;
use crate::stepper::{SchemeConfig, Snapshot};

/// `τ = (t − t0)/√(1 − (t − t0)²)`.
pub fn tau_of_t(t: f64, t0: f64) -> Result<f64> {
    let d = t - t0;
    if !(d.abs() < 1.0) {
        return Err(Error::Domain(format!("|t − t0| = {} must be below 1", d.abs())));
    }
    Ok(d / (1.0 - d * d).sqrt())
}

/// `t = t0 + τ/√(1 + τ²)`.
pub fn t_of_tau(tau: f64, t0: f64) -> Result<f64> {
    if !tau.is_finite() {
        return Err(Error::Domain(format!("τ = {tau} is not finite")));
    }
    Ok(t0 + tau / (1.0 + tau * tau).sqrt())
}

/// `dt/dτ = (1 − (t − t0)²)^{3/2}`.
pub fn jacobian(t: f64, t0: f64) -> f64 {
    let d = t - t0;
    (1.0 - d * d).powf(1.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DilatationKind {
    Local,
    Global,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilatationParams {
    pub t0: f64,
    /// Length of the original segment, in `(0, 1)`.
    pub a: f64,
    pub lambda: f64,
    pub mu: f64,
    pub kind: DilatationKind,
}

impl DilatationParams {
    pub fn new(t0: f64, a: f64, lambda: f64, mu: f64, kind: DilatationKind) -> Result<Self> {
        let p = DilatationParams { t0, a, lambda, mu, kind };
        p.validate()?;
        Ok(p)
    }

    /// Half-unit segment starting at `t0`.
    pub fn local(t0: f64, lambda: f64, mu: f64) -> Result<Self> {
        DilatationParams::new(t0, 0.5, lambda, mu, DilatationKind::Local)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(Error::param("a", format!("must lie in (0, 1), got {}", self.a)));
        }
        if self.lambda == 0.0 {
            return Err(Error::param("lambda", "must be nonzero"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::param("lambda", format!("must lie in (0, 1], got {}", self.lambda)));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::param("mu", format!("must be non-negative, got {}", self.mu)));
        }
        if !self.t0.is_finite() {
            return Err(Error::param("t0", "must be finite"));
        }
        Ok(())
    }

    /// Length `Δ = a/√(1 − a²)` of the stretched segment.
    pub fn stretched_length(&self) -> f64 {
        self.a / (1.0 - self.a * self.a).sqrt()
    }

    fn growth(&self, t: f64) -> f64 {
        match self.kind {
            DilatationKind::Local => 1.0 + self.mu * (t - self.t0),
            DilatationKind::Global => 1.0 + self.mu * t,
        }
    }

    /// Factor `λ(1 + μ(t − t0))` (or `λ(1 + μt)`) with `v = factor·u`.
    pub fn amplitude(&self, t: f64) -> f64 {
        self.lambda * self.growth(t)
    }

    /// Coefficient of the damping term `−damping·u` in the `τ` variable.
    pub fn damping(&self, t: f64) -> f64 {
        jacobian(t, self.t0) * self.mu / self.growth(t)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let d = t - self.t0;
        if d < -1e-12 || d > self.a * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "t = {t} outside the segment [{}, {}]",
                self.t0,
                self.t0 + self.a
            )));
        }
        Ok(())
    }
}

/// Snapshot of a comparison function at stretched time `tau`.
#[derive(Clone, Debug)]
pub struct ComparisonSnapshot {
    pub tau: f64,
    /// Original time `t(τ)`.
    pub t: f64,
    pub field: ModeField,
}

/// Maps the snapshots of `v` on `[t0, t0 + a]` to the comparison function.
pub fn to_comparison(snapshots: &[Snapshot], params: &DilatationParams) -> Result<Vec<ComparisonSnapshot>> {
    params.validate()?;
    snapshots
        .iter()
        .filter(|s| params.check_time(s.t).is_ok())
        .map(|s| {
            Ok(ComparisonSnapshot {
                tau: tau_of_t(s.t, params.t0)?,
                t: s.t,
                field: s.field.scaled(1.0 / params.amplitude(s.t)),
            })
        })
        .collect()
}

/// Inverse of [`to_comparison`]; snapshot steps are numbered from 0.
pub fn from_comparison(u: &[ComparisonSnapshot], params: &DilatationParams) -> Result<Vec<Snapshot>> {
    params.validate()?;
    u.iter()
        .enumerate()
        .map(|(k, c)| {
            let t = t_of_tau(c.tau, params.t0)?;
            params.check_time(t)?;
            Ok(Snapshot {
                step: k,
                t,
                field: c.field.scaled(params.amplitude(t)),
            })
        })
        .collect()
}

/// One forward-Euler step of the comparison system from stretched time `tau`:
///
/// `du/dτ = J·[ρr²·symbol·u + λ·g(t)·ρr·N(u, u) − μ/g(t)·u]`
///
/// with `J = (1 − (t − t0)²)^{3/2}`, `g` the growth factor and `N` the
/// projected nonlinearity.
pub fn damped_step(u: &ModeField, tau: f64, dtau: f64, params: &DilatationParams, cfg: &SchemeConfig) -> Result<ModeField> {
    let t = t_of_tau(tau, params.t0)?;
    params.check_time(t)?;
    let j = jacobian(t, params.t0);
    let mut out = u.clone();
    let mut nl = projected_nonlinear(u, u)?;
    nl.scale(j * params.amplitude(t) * cfg.rho_r());
    out.axpy(dtau, &nl);
    let visc = j * cfg.rho_r2();
    let damp = params.damping(t);
    let sym = symbol_table(u.lattice(), cfg.nu);
    for i in 0..u.dim() {
        let src = u.component(i);
        for ((o, x), d) in out.component_mut(i).iter_mut().zip(src).zip(&sym) {
            *o += x * (dtau * (visc * d - damp));
        }
    }
    out.set_real_flag(u.real_flag());
    if !out.is_finite() {
        out.mark_diverged();
    }
    Ok(out)
}

/// Runs `steps` damped steps over the whole stretched segment `[0, Δ]`
/// starting from `v(t0) = v0`.
pub fn run_comparison(v0: &ModeField, params: &DilatationParams, cfg: &SchemeConfig, steps: usize) -> Result<Vec<ComparisonSnapshot>> {
    params.validate()?;
    if steps == 0 {
        return Err(Error::param("steps", "must be at least 1"));
    }
    let delta = params.stretched_length();
    let dtau = delta / steps as f64;
    let mut u = v0.scaled(1.0 / params.amplitude(params.t0));
    let mut out = Vec::with_capacity(steps + 1);
    out.push(ComparisonSnapshot {
        tau: 0.0,
        t: params.t0,
        field: u.clone(),
    });
    for m in 0..steps {
        let tau = m as f64 * dtau;
        u = damped_step(&u, tau, dtau, params, cfg)?;
        u.ensure_finite()?;
        let tau_next = if m + 1 == steps { delta } else { (m + 1) as f64 * dtau };
        out.push(ComparisonSnapshot {
            tau: tau_next,
            t: t_of_tau(tau_next, params.t0)?,
            field: u.clone(),
        });
    }
    Ok(out)
}

/// Scaling `r = c0²C²/ν`, `ρ = ν/(2c0²C²)`, so that `ρr = 1/2` and
/// `ρr²ν = c0²C²/2`.
pub fn scale_parameters(nu: f64, c_data: f64, c0: f64) -> Result<(f64, f64)> {
    if nu == 0.0 {
        return Err(Error::Domain("scaling is undefined for ν = 0".into()));
    }
    for (name, x) in [("nu", nu), ("C", c_data), ("c0", c0)] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::param(name, format!("must be positive, got {x}")));
        }
    }
    let k = c0 * c0 * c_data * c_data;
    Ok((nu / (2.0 * k), k / nu))
}
