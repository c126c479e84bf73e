use serde::Serialize;

use super::{run_stage, SchemeConfig, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::sobolev_distance;

/// Maximum `h^s` distance between two runs over the coarse time grid.
///
/// `fine` must have stage `N+1` (or the same stage `N`) and the same horizon
/// and lattice as `coarse`; coarse snapshot `m` is compared with fine snapshot
/// `2m` (or `m`).
pub fn stage_doubling_error(coarse: &Trajectory, fine: &Trajectory, s: f64) -> Result<f64> {
    let (a, b) = (&coarse.config, &fine.config);
    let ratio = match b.stage.checked_sub(a.stage) {
        Some(0) => 1,
        Some(1) => 2,
        _ => {
            return Err(Error::GridMismatch(format!(
                "stages {} and {} are not consecutive",
                a.stage, b.stage
            )))
        }
    };
    if a.horizon != b.horizon {
        return Err(Error::GridMismatch(format!("horizons {} and {} differ", a.horizon, b.horizon)));
    }
    if a.n != b.n || a.truncation != b.truncation || a.l != b.l {
        return Err(Error::GridMismatch("lattices differ".into()));
    }
    if coarse.is_diverged() || fine.is_diverged() {
        return Err(Error::Domain("cannot compare diverged trajectories".into()));
    }
    let mut worst = 0.0f64;
    for snap in &coarse.snapshots {
        let other = fine.snapshot_at_step(snap.step * ratio).ok_or_else(|| {
            Error::GridMismatch(format!("fine run has no snapshot at coarse step {}", snap.step))
        })?;
        worst = worst.max(sobolev_distance(&snap.field, &other.field, s)?);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converged,
    Diverged,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveOptions {
    pub target: f64,
    /// Finest stage that may be run.
    pub n_max: u32,
    /// Sobolev order of the doubling error.
    pub s: f64,
}

#[derive(Clone, Debug)]
pub struct AdaptiveOutcome {
    pub verdict: Verdict,
    /// Finest trajectory computed (the diverged one on divergence).
    pub trajectory: Trajectory,
    /// Coarse stage whose doubling error met the target.
    pub n_used: Option<u32>,
    /// `(N, error between stages N and N+1)`.
    pub errors: Vec<(u32, f64)>,
    /// Stage at which divergence was detected.
    pub diverged_stage: Option<u32>,
}

impl AdaptiveOutcome {
    /// Observed orders `log2(e_N / e_{N+1})`.
    pub fn orders(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| (w[0].1 / w[1].1).log2()).collect()
    }
}

/// Doubles the stage from `cfg.stage` until the stage-doubling error drops
/// below the target or `n_max` is reached.
pub fn run_adaptive(h: &crate::spectral::ModeField, cfg: &SchemeConfig, opts: AdaptiveOptions) -> Result<AdaptiveOutcome> {
    if !(opts.target > 0.0) {
        return Err(Error::param("target", "must be positive"));
    }
    if opts.n_max <= cfg.stage {
        return Err(Error::param("n_max", format!("must exceed the initial stage {}", cfg.stage)));
    }
    let diverged = |trajectory: Trajectory, errors, stage| AdaptiveOutcome {
        verdict: Verdict::Diverged,
        trajectory,
        n_used: None,
        errors,
        diverged_stage: Some(stage),
    };
    let mut prev = run_stage(h, cfg)?;
    if prev.is_diverged() {
        return Ok(diverged(prev, Vec::new(), cfg.stage));
    }
    let mut errors = Vec::new();
    for stage in cfg.stage..opts.n_max {
        let fine = run_stage(h, &cfg.clone().with_stage(stage + 1))?;
        if fine.is_diverged() {
            return Ok(diverged(fine, errors, stage + 1));
        }
        let err = stage_doubling_error(&prev, &fine, opts.s)?;
        errors.push((stage, err));
        if err < opts.target {
            return Ok(AdaptiveOutcome {
                verdict: Verdict::Converged,
                trajectory: fine,
                n_used: Some(stage),
                errors,
                diverged_stage: None,
            });
        }
        prev = fine;
    }
    Ok(AdaptiveOutcome {
        verdict: Verdict::Inconclusive,
        trajectory: prev,
        n_used: None,
        errors,
        diverged_stage: None,
    })
}
