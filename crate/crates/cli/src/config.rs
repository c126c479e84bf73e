//! Run configuration: a scheme, a preset and at most one run mode.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use torus_ns::dilatation::{DilatationKind, DilatationParams};
use torus_ns::presets::{random_decay, single_shear, taylor_green_2d};
use torus_ns::spectral::{read_field, ModeField, ModeLattice};
use torus_ns::stepper::{AdaptiveOptions, SchemeConfig};

use crate::CliError;

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

/// Initial data, addressed by preset name.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    TaylorGreen {
        #[serde(default = "one")]
        amplitude: f64,
    },
    SingleShear {
        component: usize,
        axis: usize,
        #[serde(default = "one")]
        amplitude: f64,
    },
    RandomDecay {
        s: f64,
        #[serde(rename = "C")]
        c: f64,
        #[serde(default)]
        seed: u64,
    },
    /// A field file; relative paths resolve against the config file.
    File { path: PathBuf },
}

impl Preset {
    /// Presets whose exact solution is the viscous factor applied to the data.
    pub fn is_linear(&self) -> bool {
        matches!(self, Preset::TaylorGreen { .. } | Preset::SingleShear { .. })
    }

    pub fn build(&self, cfg: &SchemeConfig, base: &Path) -> Result<ModeField, CliError> {
        let lat = Arc::new(ModeLattice::new(cfg.n, cfg.truncation, cfg.l)?);
        let field = match self {
            Preset::TaylorGreen { amplitude } => taylor_green_2d(&lat, *amplitude)?,
            Preset::SingleShear { component, axis, amplitude } => single_shear(&lat, *component, *axis, *amplitude)?,
            Preset::RandomDecay { s, c, seed } => random_decay(&lat, *s, *c, *seed)?,
            Preset::File { path } => read_field(&base.join(path))?,
        };
        Ok(field)
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveSpec {
    pub target: f64,
    pub n_max: u32,
    #[serde(default = "default_adaptive_s")]
    pub s: f64,
}

fn default_adaptive_s() -> f64 {
    2.0
}

impl AdaptiveSpec {
    pub fn options(&self) -> AdaptiveOptions {
        AdaptiveOptions {
            target: self.target,
            n_max: self.n_max,
            s: self.s,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardSpec {
    pub s: f64,
    /// Weight `c` of `e^{−ct}`; three times the Lipschitz surrogate when absent.
    #[serde(default)]
    pub c_weight: Option<f64>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_picard_tol")]
    pub tol: f64,
    #[serde(default = "default_probes")]
    pub probes: usize,
}

fn default_max_iter() -> usize {
    40
}

fn default_picard_tol() -> f64 {
    1e-12
}

fn default_probes() -> usize {
    8
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilatationSpec {
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "half")]
    pub a: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_kind")]
    pub kind: DilatationKind,
    pub steps: usize,
}

fn default_kind() -> DilatationKind {
    DilatationKind::Local
}

impl DilatationSpec {
    pub fn params(&self) -> Result<DilatationParams, CliError> {
        Ok(DilatationParams::new(self.t0, self.a, self.lambda, self.mu, self.kind)?)
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    /// Stages to run; defaults to `N … N+3`.
    #[serde(default)]
    pub stages: Option<Vec<u32>>,
    #[serde(default)]
    pub s: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Write `trajectory.json`.
    #[serde(default = "yes")]
    pub snapshots: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: SchemeConfig,
    pub preset: Preset,
    #[serde(default)]
    pub adaptive: Option<AdaptiveSpec>,
    #[serde(default)]
    pub picard: Option<PicardSpec>,
    #[serde(default)]
    pub dilatation: Option<DilatationSpec>,
    #[serde(default)]
    pub compare: Option<CompareSpec>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    /// Directory of the config file, for relative paths.
    #[serde(skip)]
    pub base: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.scheme.validate()?;
        let modes = [self.adaptive.is_some(), self.picard.is_some(), self.dilatation.is_some()];
        if modes.iter().filter(|&&m| m).count() > 1 {
            return Err(CliError::Config("at most one of `adaptive`, `picard`, `dilatation` may be set".into()));
        }
        if let Some(d) = &self.dilatation {
            d.params()?;
            if d.steps == 0 {
                return Err(CliError::Config("dilatation.steps: must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// `--seed` replaces the seed of random presets.
    pub fn apply_seed(&mut self, seed: u64) {
        if let Preset::RandomDecay { seed: s, .. } = &mut self.preset {
            *s = seed;
        }
    }

    pub fn data(&self) -> Result<ModeField, CliError> {
        self.preset.build(&self.scheme, &self.base)
    }

    pub fn write_snapshots(&self) -> bool {
        self.output.as_ref().map_or(true, |o| o.snapshots)
    }

    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(dir) = flag {
            return dir.to_path_buf();
        }
        match self.output.as_ref().and_then(|o| o.dir.as_ref()) {
            Some(dir) => self.base.join(dir),
            None => PathBuf::from("torus-ns-out"),
        }
    }
}
