//! `run`: one configured simulation and its artifacts.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use torus_ns::dilatation::{from_comparison, run_comparison};
use torus_ns::picard::{lipschitz_surrogate, picard_iterate, WeightedNormSpec};
use torus_ns::spectral::{max_divergence, sobolev_distance, sobolev_norm_unchecked, ModeField};
use torus_ns::stepper::{exp_diag, run_adaptive, run_stage, Divergence, Trajectory, Verdict};
use torus_ns::Error;

use crate::config::{DilatationSpec, PicardSpec, RunConfig};
use crate::output::{num, write_csv, write_diagnostics, write_json, write_trajectory};
use crate::CliError;

#[derive(Serialize)]
struct NormEntry {
    s: f64,
    value: f64,
}

#[derive(Serialize, Default)]
struct PicardSummary {
    c_weight: f64,
    lipschitz_surrogate: Option<f64>,
    distances: Vec<f64>,
    ratios: Vec<f64>,
    iterations: usize,
}

#[derive(Serialize)]
pub struct RunSummary {
    mode: &'static str,
    verdict: Verdict,
    #[serde(rename = "N_used")]
    n_used: Option<u32>,
    #[serde(rename = "N")]
    stage: u32,
    steps_completed: usize,
    final_time: f64,
    final_norms: Vec<NormEntry>,
    max_divergence: f64,
    zero_mode_max: f64,
    /// Relative `h²` distance to the exact solution, for presets that have one.
    analytic_h2_error: Option<f64>,
    /// `(N, stage-doubling error between N and N+1)`.
    doubling_errors: Vec<(u32, f64)>,
    divergence: Option<Divergence>,
    /// `h^{n/2+1}` norm per step, kept as evidence when the run did not converge.
    norm_history: Option<Vec<f64>>,
    picard: Option<PicardSummary>,
}

impl RunSummary {
    pub fn verdict(&self) -> Verdict {
        self.verdict
    }
}

pub fn cmd_run(cfg: &RunConfig, out: &Path, seed: Option<u64>) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let h = cfg.data()?;
    let summary = if let Some(spec) = &cfg.adaptive {
        let res = run_adaptive(&h, &cfg.scheme, spec.options())?;
        let mut s = from_trajectory("adaptive", cfg, &h, &res.trajectory, res.verdict);
        s.n_used = res.n_used;
        s.doubling_errors = res.errors;
        if res.verdict != Verdict::Converged {
            s.norm_history = Some(res.trajectory.watch_history.clone());
        }
        write_trajectory_files(cfg, out, &res.trajectory)?;
        s
    } else if let Some(spec) = &cfg.picard {
        picard(cfg, &h, spec, out, seed.unwrap_or(0))?
    } else if let Some(spec) = &cfg.dilatation {
        dilatation(cfg, &h, spec, out)?
    } else {
        let traj = run_stage(&h, &cfg.scheme)?;
        let verdict = if traj.is_diverged() { Verdict::Diverged } else { Verdict::Converged };
        let mut s = from_trajectory("stage", cfg, &h, &traj, verdict);
        if traj.is_diverged() {
            s.norm_history = Some(traj.watch_history.clone());
        }
        write_trajectory_files(cfg, out, &traj)?;
        s
    };
    write_json(out, "summary.json", &summary)?;
    // Wall time lives in its own file so the summary stays reproducible.
    let wall = start.elapsed().as_secs_f64();
    write_json(out, "timing.json", &serde_json::json!({ "wall_time_s": wall }))?;
    eprintln!("wall time {wall:.3}s");
    Ok(summary)
}

fn write_trajectory_files(cfg: &RunConfig, out: &Path, traj: &Trajectory) -> Result<(), CliError> {
    if cfg.write_snapshots() {
        write_trajectory(out, "trajectory.json", &traj.snapshots)?;
    }
    write_diagnostics(out, &traj.norm_orders, &traj.diagnostics)
}

fn analytic_error(cfg: &RunConfig, h: &ModeField, field: &ModeField, t: f64) -> Option<f64> {
    if !cfg.preset.is_linear() || field.is_diverged() {
        return None;
    }
    let exact = exp_diag(h, t, &cfg.scheme);
    let scale = sobolev_norm_unchecked(&exact, 2.0);
    let d = sobolev_distance(field, &exact, 2.0).ok()?;
    Some(if scale > 0.0 { d / scale } else { d })
}

fn summarize(mode: &'static str, cfg: &RunConfig, h: &ModeField, field: &ModeField, t: f64, verdict: Verdict) -> RunSummary {
    RunSummary {
        mode,
        verdict,
        n_used: None,
        stage: cfg.scheme.stage,
        steps_completed: 0,
        final_time: t,
        final_norms: cfg
            .scheme
            .norm_orders
            .iter()
            .map(|&s| NormEntry {
                s,
                value: sobolev_norm_unchecked(field, s),
            })
            .collect(),
        max_divergence: max_divergence(field),
        zero_mode_max: field.zero_mode_max(),
        analytic_h2_error: analytic_error(cfg, h, field, t),
        doubling_errors: Vec::new(),
        divergence: None,
        norm_history: None,
        picard: None,
    }
}

fn from_trajectory(mode: &'static str, cfg: &RunConfig, h: &ModeField, traj: &Trajectory, verdict: Verdict) -> RunSummary {
    let last = traj.snapshots.last().expect("trajectories keep the initial snapshot");
    let mut s = summarize(mode, cfg, h, &last.field, last.t, verdict);
    s.stage = traj.stage();
    s.steps_completed = traj.completed_steps;
    s.divergence = traj.divergence.clone();
    s
}

fn picard(cfg: &RunConfig, h: &ModeField, spec: &PicardSpec, out: &Path, seed: u64) -> Result<RunSummary, CliError> {
    let sc = &cfg.scheme;
    let (c_weight, lip) = match spec.c_weight {
        Some(c) => (c, None),
        None => {
            let lip = lipschitz_surrogate(h, spec.s, sc, spec.probes, seed)?;
            (3.0 * lip, Some(lip))
        }
    };
    let weight = WeightedNormSpec::new(spec.s, c_weight, sc.horizon)?;
    match picard_iterate(h, sc, &weight, spec.max_iter, spec.tol) {
        Ok(res) => {
            let verdict = if res.converged { Verdict::Converged } else { Verdict::Inconclusive };
            let mut s = from_trajectory("picard", cfg, h, &res.trajectory, verdict);
            s.picard = Some(PicardSummary {
                c_weight,
                lipschitz_surrogate: lip,
                distances: res.distances,
                ratios: res.ratios,
                iterations: res.iterations,
            });
            write_trajectory_files(cfg, out, &res.trajectory)?;
            Ok(s)
        }
        Err(Error::NoContraction { iterations, ratios }) => {
            let mut s = summarize("picard", cfg, h, h, 0.0, Verdict::Diverged);
            s.picard = Some(PicardSummary {
                c_weight,
                lipschitz_surrogate: lip,
                ratios,
                iterations,
                ..PicardSummary::default()
            });
            Ok(s)
        }
        Err(e) => Err(e.into()),
    }
}

fn dilatation(cfg: &RunConfig, h: &ModeField, spec: &DilatationSpec, out: &Path) -> Result<RunSummary, CliError> {
    let params = spec.params()?;
    let comparison = match run_comparison(h, &params, &cfg.scheme, spec.steps) {
        Ok(c) => c,
        Err(Error::FieldDiverged { component, mode }) => {
            let mut s = summarize("dilatation", cfg, h, h, params.t0, Verdict::Diverged);
            s.divergence = Some(Divergence {
                step: 0,
                reason: format!("non-finite comparison field in component {component} at mode index {mode}"),
                norm: f64::NAN,
            });
            return Ok(s);
        }
        Err(e) => return Err(e.into()),
    };
    let snapshots = from_comparison(&comparison, &params)?;
    let last = snapshots.last().expect("comparison runs keep the initial snapshot");
    let mut s = summarize("dilatation", cfg, h, &last.field, last.t, Verdict::Converged);
    s.steps_completed = spec.steps;
    // The stretched run starts at t0; the exact reference is relative to it.
    s.analytic_h2_error = analytic_error(cfg, h, &last.field, last.t - params.t0);
    if cfg.write_snapshots() {
        write_trajectory(out, "trajectory.json", &snapshots)?;
    }
    let orders = &cfg.scheme.norm_orders;
    let mut header = vec!["tau".to_string(), "t".to_string()];
    header.extend(orders.iter().map(|s| format!("u_h{s}")));
    header.extend(orders.iter().map(|s| format!("v_h{s}")));
    let rows: Vec<Vec<String>> = comparison
        .iter()
        .zip(&snapshots)
        .map(|(u, v)| {
            let mut row = vec![num(u.tau), num(u.t)];
            row.extend(orders.iter().map(|&s| num(sobolev_norm_unchecked(&u.field, s))));
            row.extend(orders.iter().map(|&s| num(sobolev_norm_unchecked(&v.field, s))));
            row
        })
        .collect();
    write_csv(out, "comparison.csv", &header, &rows)?;
    Ok(s)
}
