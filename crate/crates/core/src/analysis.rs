//! Convolution bounds, decay-envelope monitoring and data classification.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{fit_decay, shell_maxima, DecayProfile, ModeField};
use crate::stepper::{run_adaptive, AdaptiveOptions, Divergence, Monitor, SchemeConfig, Trajectory, Verdict};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvolutionBound {
    /// `max_α S(α)·(1+|α|^{m+l−n})`.
    pub c: f64,
    pub worst_alpha: Vec<i32>,
    /// `S(0)`.
    pub s_zero: f64,
}

fn box_points(n: usize, radius: i32) -> Vec<Vec<i32>> {
    let side = (2 * radius + 1) as usize;
    let total = side.pow(n as u32);
    (0..total)
        .map(|mut k| {
            let mut p = vec![0i32; n];
            for c in (0..n).rev() {
                p[c] = (k % side) as i32 - radius;
                k /= side;
            }
            p
        })
        .collect()
}

fn magnitude(p: &[i32]) -> f64 {
    p.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt()
}

/// Brute-force check of the weakly singular sum
/// `S(α) = Σ_{|β_i|≤β_max} 1/((1+|α−β|^m)(1+|β|^l))` over `|α_i| ≤ α_max`.
pub fn convolution_bound(n: usize, exp_m: f64, exp_l: f64, alpha_max: usize, beta_max: usize) -> Result<ConvolutionBound> {
    let nf = n as f64;
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if !(exp_m > nf && exp_l > nf) {
        return Err(Error::param("exp", format!("exponents must exceed n = {n}, got {exp_m} and {exp_l}")));
    }
    if beta_max < alpha_max {
        return Err(Error::param("beta_max", "must be at least alpha_max"));
    }
    let betas = box_points(n, beta_max as i32);
    let beta_weight: Vec<f64> = betas.iter().map(|b| 1.0 / (1.0 + magnitude(b).powf(exp_l))).collect();
    let target = exp_m + exp_l - nf;
    let sum_at = |alpha: &[i32]| -> f64 {
        let mut diff = vec![0i32; n];
        betas
            .iter()
            .zip(&beta_weight)
            .map(|(b, w)| {
                for c in 0..n {
                    diff[c] = alpha[c] - b[c];
                }
                w / (1.0 + magnitude(&diff).powf(exp_m))
            })
            .sum()
    };
    let results: Vec<(f64, Vec<i32>)> = box_points(n, alpha_max as i32)
        .into_par_iter()
        .map(|a| {
            let value = sum_at(&a) * (1.0 + magnitude(&a).powf(target));
            (value, a)
        })
        .collect();
    let (c, worst_alpha) = results
        .into_iter()
        .fold((f64::NEG_INFINITY, Vec::new()), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(ConvolutionBound {
        c,
        worst_alpha,
        s_zero: sum_at(&vec![0; n]),
    })
}

/// `c(n) = 4π²(n + n²)·c0` of the step-size condition.
pub fn step_constant(n: usize, c0: f64) -> f64 {
    let nf = n as f64;
    4.0 * PI * PI * (nf + nf * nf) * c0
}

/// Largest step `1/(c(n)·C²)` allowed by the step-size condition.
pub fn step_bound(n: usize, c0: f64, c_data: f64) -> f64 {
    1.0 / (step_constant(n, c0) * c_data * c_data)
}

/// Worst-case envelope constant `C·(c(n)²C²/ν)^m`, reported next to the
/// empirical one.
pub fn regularity_constant(n: usize, c0: f64, c_data: f64, nu: f64, m: f64) -> f64 {
    let cn = step_constant(n, c0);
    c_data * (cn * cn * c_data * c_data / nu).powf(m)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    /// Envelope constant `C₀ = max_{i,α≠0} |h_{iα}|(1+|α|^{n+s})` of the data.
    pub c0: f64,
    /// `(step, margin)`; margin `≥ 1` means the envelope holds.
    pub margins: Vec<(usize, f64)>,
    pub first_violation: Option<usize>,
    pub min_margin: f64,
    /// Smallest constant for which the envelope holds on the whole run.
    pub c_required: f64,
}

/// Margins `C₀ / max_{i,α≠0} |v_{iα}|(1+|α|^{n+s})` along a trajectory.
///
/// Every step is covered when `s` equals the run's `bound_s`; otherwise the
/// margins are evaluated on the stored snapshots.
pub fn bound_monitor(traj: &Trajectory, s: f64) -> BoundReport {
    let margins: Vec<(usize, f64)> = if s == traj.config.bound_s {
        traj.diagnostics.iter().map(|r| (r.step, r.bound_margin)).collect()
    } else {
        let monitor = Monitor::new(traj.initial(), &[], 0.0, s);
        traj.snapshots.iter().map(|snap| (snap.step, monitor.margin(&snap.field))).collect()
    };
    let c0 = if s == traj.config.bound_s {
        traj.bound_constant
    } else {
        Monitor::new(traj.initial(), &[], 0.0, s).bound_constant
    };
    let first_violation = margins.iter().find(|(_, m)| !(*m >= 1.0)).map(|&(k, _)| k);
    let min_margin = margins.iter().map(|&(_, m)| m).fold(f64::INFINITY, |a, b| if b < a || b.is_nan() { b } else { a });
    BoundReport {
        c0,
        c_required: if min_margin > 0.0 { c0 / min_margin } else { f64::INFINITY },
        margins,
        first_violation,
        min_margin,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularity {
    Convergent,
    Critical,
    Divergent,
}

/// Half-width of the critical band around `s = 1`.
pub const CRITICAL_BAND: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Regularity,
    pub profile: DecayProfile,
}

/// Classifies data by the fitted decay index `s = e − n`.
pub fn classify_data(h: &ModeField) -> Result<Classification> {
    let shells = shell_maxima(h).len();
    if shells < 3 {
        return Err(Error::InsufficientShells { found: shells, needed: 3 });
    }
    let profile = fit_decay(h)?;
    let s = profile.s_estimate;
    let verdict = if s > 1.0 + CRITICAL_BAND {
        Regularity::Convergent
    } else if s < 1.0 - CRITICAL_BAND {
        Regularity::Divergent
    } else {
        Regularity::Critical
    };
    Ok(Classification { verdict, profile })
}

/// Outcome of an adaptive probe. A `diverged` or `inconclusive` verdict
/// describes the scheme on this truncation, not the PDE.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub verdict: Verdict,
    pub s_estimate: Option<f64>,
    #[serde(rename = "C")]
    pub constant: Option<f64>,
    #[serde(rename = "N_used")]
    pub n_used: Option<u32>,
    /// `(N, stage-doubling error between N and N+1)`.
    pub errors: Vec<(u32, f64)>,
    pub diverged_stage: Option<u32>,
    pub divergence: Option<Divergence>,
    /// `h^{n/2+1}` norm after every step of the last run.
    pub norm_history: Vec<f64>,
}

pub fn divergence_probe(h: &ModeField, cfg: &SchemeConfig, opts: AdaptiveOptions) -> Result<ProbeReport> {
    let profile = fit_decay(h).ok();
    let out = run_adaptive(h, cfg, opts)?;
    Ok(ProbeReport {
        verdict: out.verdict,
        s_estimate: profile.as_ref().map(|p| p.s_estimate),
        constant: profile.as_ref().map(|p| p.constant),
        n_used: out.n_used,
        errors: out.errors,
        diverged_stage: out.diverged_stage,
        divergence: out.trajectory.divergence.clone(),
        norm_history: out.trajectory.watch_history.clone(),
    })
}
