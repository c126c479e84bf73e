//! `compare`: forward Euler and Trotter against a four-stage oracle.

use std::path::Path;

use serde::Serialize;
use torus_ns::spectral::{sobolev_distance, ModeField};
use torus_ns::stepper::{rk4_step, run_stage, run_with, Control, SchemeConfig, StepKind, Trajectory};

use crate::config::RunConfig;
use crate::output::{num, write_csv, write_json};
use crate::CliError;

#[derive(Serialize)]
struct CompareRow {
    #[serde(rename = "N")]
    stage: u32,
    dt: f64,
    forward_euler: f64,
    trotter: f64,
    rk4: f64,
}

#[derive(Serialize)]
pub struct CompareSummary {
    s: f64,
    reference_stage: u32,
    rows: Vec<CompareRow>,
    /// `log2` ratios of successive distances.
    orders_forward_euler: Vec<f64>,
    orders_trotter: Vec<f64>,
    pub diverged: bool,
}

fn finish(traj: Trajectory) -> Option<ModeField> {
    (!traj.is_diverged()).then(|| traj.final_field().clone())
}

fn run_kind(h: &ModeField, cfg: &SchemeConfig, kind: StepKind) -> Result<Option<ModeField>, CliError> {
    Ok(finish(run_stage(h, &cfg.clone().with_mode(kind))?))
}

fn run_rk4(h: &ModeField, cfg: &SchemeConfig) -> Result<Option<ModeField>, CliError> {
    Ok(finish(run_with(h, cfg, |v, ctx| rk4_step(v, ctx.dt, ctx.config))?))
}

fn orders(d: &[f64]) -> Vec<f64> {
    d.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

pub fn cmd_compare(cfg: &RunConfig, out: &Path) -> Result<CompareSummary, CliError> {
    let spec = cfg.compare.clone().unwrap_or_default();
    let s = spec.s.unwrap_or(2.0);
    let base = cfg.scheme.clone().with_control(Control::None);
    let mut stages = spec.stages.unwrap_or_else(|| (base.stage..base.stage + 4).collect());
    stages.sort_unstable();
    stages.dedup();
    let Some(&finest) = stages.last() else {
        return Err(CliError::Config("compare.stages: must not be empty".into()));
    };
    let h = cfg.data()?;
    let nan = f64::NAN;
    let mut diverged = false;
    let reference = run_rk4(&h, &base.clone().with_stage(finest))?;
    let dist = |f: Option<ModeField>, diverged: &mut bool| -> Result<f64, CliError> {
        match (f, &reference) {
            (Some(f), Some(r)) => Ok(sobolev_distance(&f, r, s)?),
            _ => {
                *diverged = true;
                Ok(nan)
            }
        }
    };
    let mut rows = Vec::new();
    for &stage in &stages {
        let c = base.clone().with_stage(stage);
        let fe = dist(run_kind(&h, &c, StepKind::ForwardEuler)?, &mut diverged)?;
        let tr = dist(run_kind(&h, &c, StepKind::Trotter)?, &mut diverged)?;
        let rk = dist(run_rk4(&h, &c)?, &mut diverged)?;
        rows.push(CompareRow {
            stage,
            dt: c.dt(),
            forward_euler: fe,
            trotter: tr,
            rk4: rk,
        });
    }
    let header = ["N", "dt", "forward_euler", "trotter", "rk4"].map(String::from);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.stage.to_string(), num(r.dt), num(r.forward_euler), num(r.trotter), num(r.rk4)])
        .collect();
    write_csv(out, "compare.csv", &header, &body)?;
    let summary = CompareSummary {
        s,
        reference_stage: finest,
        orders_forward_euler: orders(&rows.iter().map(|r| r.forward_euler).collect::<Vec<_>>()),
        orders_trotter: orders(&rows.iter().map(|r| r.trotter).collect::<Vec<_>>()),
        rows,
        diverged,
    };
    write_json(out, "compare_summary.json", &summary)?;
    Ok(summary)
}
