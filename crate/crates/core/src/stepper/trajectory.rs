use serde::Serialize;

use super::{extended_controlled_step, step, without_zero_modes, zero_modes, Control, SchemeConfig};
use crate::error::{Error, Result};
use crate::spectral::{max_divergence, ModeField, ModeLattice};

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub field: ModeField,
}

/// Per-step diagnostics; row `m` describes the field after `m` steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRow {
    pub step: usize,
    pub t: f64,
    /// `h^s` norms for `Trajectory::norm_orders`.
    pub hs_norms: Vec<f64>,
    pub max_div: f64,
    /// `C₀ / max_{i,α≠0} |v_{iα}|(1+|α|^{n+s})`; at least 1 while the initial
    /// envelope holds.
    pub bound_margin: f64,
    pub zero_mode_max: f64,
    pub c_accum: Vec<f64>,
    pub diverged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Divergence {
    /// Index of the step whose output failed.
    pub step: usize,
    pub reason: String,
    /// `h^{n/2+1}` norm at failure (may be non-finite).
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: SchemeConfig,
    pub norm_orders: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<DiagnosticsRow>,
    pub divergence: Option<Divergence>,
    pub completed_steps: usize,
    /// `h^{n/2+1}` norm after every step, starting with the data.
    pub watch_history: Vec<f64>,
    /// Envelope constant `C₀ = max_{i,α≠0} |h_{iα}|(1+|α|^{n+s})` of the data.
    pub bound_constant: f64,
}

impl Trajectory {
    pub fn is_diverged(&self) -> bool {
        self.divergence.is_some()
    }

    pub fn dt(&self) -> f64 {
        self.config.dt()
    }

    pub fn stage(&self) -> u32 {
        self.config.stage
    }

    pub fn initial(&self) -> &ModeField {
        &self.snapshots[0].field
    }

    pub fn final_field(&self) -> &ModeField {
        &self.snapshots.last().expect("trajectory has the initial snapshot").field
    }

    pub fn final_time(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |s| s.t)
    }

    pub fn snapshot_at_step(&self, step: usize) -> Option<&Snapshot> {
        self.snapshots
            .binary_search_by_key(&step, |s| s.step)
            .ok()
            .map(|k| &self.snapshots[k])
    }

    pub fn margins(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|r| r.bound_margin).collect()
    }

    /// Final control accumulator (zeros without control).
    pub fn final_control(&self) -> &[f64] {
        &self.diagnostics.last().expect("at least one row").c_accum
    }
}

/// Weight tables shared by every diagnostics row.
pub(crate) struct Monitor {
    norm_weights: Vec<Vec<f64>>,
    watch_weights: Vec<f64>,
    envelope: Vec<f64>,
    zero: usize,
    pub bound_constant: f64,
}

fn weights(lat: &ModeLattice, s: f64) -> Vec<f64> {
    (0..lat.len()).map(|k| (1.0 + lat.norm_sq(k)).powf(s)).collect()
}

fn weighted_norm(v: &ModeField, w: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..v.dim() {
        for (c, wk) in v.component(i).iter().zip(w) {
            acc += c.norm_sqr() * wk;
        }
    }
    acc.sqrt()
}

impl Monitor {
    pub(crate) fn new(h: &ModeField, orders: &[f64], watch: f64, bound_s: f64) -> Self {
        let lat = h.lattice();
        let exponent = lat.dim() as f64 + bound_s;
        let envelope: Vec<f64> = (0..lat.len()).map(|k| 1.0 + lat.magnitude(k).powf(exponent)).collect();
        let mut m = Monitor {
            norm_weights: orders.iter().map(|&s| weights(lat, s)).collect(),
            watch_weights: weights(lat, watch),
            envelope,
            zero: lat.zero_index(),
            bound_constant: 0.0,
        };
        m.bound_constant = m.envelope_peak(h);
        m
    }

    /// `max_{i,α≠0} |v_{iα}|(1+|α|^{n+s})`.
    pub(crate) fn envelope_peak(&self, v: &ModeField) -> f64 {
        let mut peak = 0.0f64;
        for i in 0..v.dim() {
            for (k, (c, e)) in v.component(i).iter().zip(&self.envelope).enumerate() {
                if k != self.zero {
                    peak = peak.max(c.norm() * e);
                }
            }
        }
        peak
    }

    pub(crate) fn margin(&self, v: &ModeField) -> f64 {
        let peak = self.envelope_peak(v);
        if peak == 0.0 {
            f64::INFINITY
        } else if peak.is_nan() {
            f64::NAN
        } else {
            self.bound_constant / peak
        }
    }

    pub(crate) fn watch(&self, v: &ModeField) -> f64 {
        weighted_norm(v, &self.watch_weights)
    }

    pub(crate) fn row(&self, step: usize, t: f64, v: &ModeField, c: &[f64], diverged: bool) -> DiagnosticsRow {
        DiagnosticsRow {
            step,
            t,
            hs_norms: self.norm_weights.iter().map(|w| weighted_norm(v, w)).collect(),
            max_div: max_divergence(v),
            bound_margin: self.margin(v),
            zero_mode_max: v.zero_mode_max(),
            c_accum: c.to_vec(),
            diverged,
        }
    }
}

/// State handed to a custom step function.
pub struct StepContext<'a> {
    /// Index of the step being taken (0-based).
    pub step: usize,
    /// Start time of the step.
    pub t: f64,
    pub dt: f64,
    pub config: &'a SchemeConfig,
    /// Zero-mode control accumulator (all zeros without control).
    pub control: &'a mut Vec<f64>,
}

/// Runs `2^N` steps of `stepper` from `h`, recording diagnostics and
/// snapshots.
///
/// With `ExtendedZeroMode` control the data's zero modes seed the accumulator
/// and are removed from the field before the first step. The run stops early,
/// marked diverged, when a step yields non-finite values, the `h^{n/2+1}`
/// norm exceeds `divergence_threshold` times its initial value, or the
/// exponential fails to converge.
pub fn run_with<F>(h: &ModeField, cfg: &SchemeConfig, mut stepper: F) -> Result<Trajectory>
where
    F: FnMut(&ModeField, &mut StepContext<'_>) -> Result<ModeField>,
{
    cfg.validate()?;
    let lat = h.lattice();
    if lat.dim() != cfg.n || lat.truncation() != cfg.truncation || lat.torus_size() != cfg.l {
        return Err(Error::LatticeMismatch(format!(
            "data has n={} L={} l={}, config has n={} L={} l={}",
            lat.dim(),
            lat.truncation(),
            lat.torus_size(),
            cfg.n,
            cfg.truncation,
            cfg.l
        )));
    }
    h.ensure_finite()?;

    let monitor = Monitor::new(h, &cfg.norm_orders, cfg.watch_order(), cfg.bound_s);
    let controlled = cfg.control == Control::ExtendedZeroMode;
    let mut control = if controlled { zero_modes(h) } else { vec![0.0; cfg.n] };
    let mut v = if controlled { without_zero_modes(h) } else { h.clone() };

    let dt = cfg.dt();
    let steps = cfg.steps();
    let stride = cfg.stride();
    let initial_watch = monitor.watch(&v);
    let limit = cfg.divergence_threshold * initial_watch;

    let mut traj = Trajectory {
        config: cfg.clone(),
        norm_orders: cfg.norm_orders.clone(),
        snapshots: vec![Snapshot {
            step: 0,
            t: 0.0,
            field: v.clone(),
        }],
        diagnostics: vec![monitor.row(0, 0.0, &v, &control, false)],
        divergence: None,
        completed_steps: 0,
        watch_history: vec![initial_watch],
        bound_constant: monitor.bound_constant,
    };

    for m in 0..steps {
        let t = m as f64 * dt;
        let mut ctx = StepContext {
            step: m,
            t,
            dt,
            config: cfg,
            control: &mut control,
        };
        let (next, failure) = match stepper(&v, &mut ctx) {
            Ok(next) => {
                let watch = monitor.watch(&next);
                let failure = if next.is_diverged() || !watch.is_finite() {
                    Some(("non-finite coefficients".to_string(), watch))
                } else if initial_watch > 0.0 && watch > limit {
                    Some((format!("h^{} norm exceeded {} times its initial value", cfg.watch_order(), cfg.divergence_threshold), watch))
                } else {
                    None
                };
                (next, failure)
            }
            Err(err @ Error::ExpmNotConverged { .. }) => {
                let mut stuck = v.clone();
                stuck.mark_diverged();
                (stuck, Some((err.to_string(), monitor.watch(&v))))
            }
            Err(err) => return Err(err),
        };
        v = next;
        let t_next = (m + 1) as f64 * dt;
        let diverged = failure.is_some();
        traj.watch_history.push(failure.as_ref().map_or_else(|| monitor.watch(&v), |f| f.1));
        traj.diagnostics.push(monitor.row(m + 1, t_next, &v, &control, diverged));
        if let Some((reason, norm)) = failure {
            v.mark_diverged();
            traj.snapshots.push(Snapshot {
                step: m + 1,
                t: t_next,
                field: v,
            });
            traj.divergence = Some(Divergence { step: m, reason, norm });
            return Ok(traj);
        }
        traj.completed_steps = m + 1;
        if (m + 1) % stride == 0 || m + 1 == steps {
            traj.snapshots.push(Snapshot {
                step: m + 1,
                t: t_next,
                field: v.clone(),
            });
        }
    }
    Ok(traj)
}

/// Runs the configured step kind and control for `2^N` steps.
pub fn run_stage(h: &ModeField, cfg: &SchemeConfig) -> Result<Trajectory> {
    let controlled = cfg.control == Control::ExtendedZeroMode;
    run_with(h, cfg, |v, ctx| {
        if controlled {
            let (next, c) = extended_controlled_step(v, ctx.control, ctx.dt, ctx.config)?;
            *ctx.control = c;
            Ok(next)
        } else {
            step(v, ctx.dt, ctx.config)
        }
    })
}
