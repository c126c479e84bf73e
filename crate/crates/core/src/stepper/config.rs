use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    ForwardEuler,
    Trotter,
    TrotterDyson,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Control {
    None,
    ExtendedZeroMode,
}

fn one() -> f64 {
    1.0
}
fn default_mode() -> StepKind {
    StepKind::Trotter
}
fn default_control() -> Control {
    Control::None
}
fn default_exp_tolerance() -> f64 {
    1e-15
}
fn default_max_exp_terms() -> usize {
    200
}
fn default_threshold() -> f64 {
    1e6
}
fn default_norm_orders() -> Vec<f64> {
    vec![0.0, 1.0, 2.0]
}
fn default_bound_s() -> f64 {
    1.5
}
fn default_quad_points() -> usize {
    4
}

/// Physical and numerical parameters of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub n: usize,
    #[serde(rename = "L")]
    pub truncation: usize,
    #[serde(default = "one")]
    pub l: f64,
    pub nu: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub stage: u32,
    #[serde(default = "one")]
    pub rho: f64,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_mode")]
    pub mode: StepKind,
    #[serde(default = "default_control")]
    pub control: Control,
    #[serde(default = "default_exp_tolerance")]
    pub exp_tolerance: f64,
    #[serde(default = "default_max_exp_terms")]
    pub max_exp_terms: usize,
    /// Multiple of the initial `h^{n/2+1}` norm that counts as blow-up.
    #[serde(default = "default_threshold")]
    pub divergence_threshold: f64,
    /// `None` keeps every `2^{N−6}`-th step.
    #[serde(default)]
    pub snapshot_stride: Option<usize>,
    /// Sobolev orders recorded in the diagnostics.
    #[serde(default = "default_norm_orders")]
    pub norm_orders: Vec<f64>,
    /// Regularity index `s` of the envelope `C₀/(1+|α|^{n+s})` behind the
    /// bound margin.
    #[serde(default = "default_bound_s")]
    pub bound_s: f64,
    /// Quadrature nodes per nesting level for the Dyson step.
    #[serde(default = "default_quad_points")]
    pub dyson_quad_points: usize,
}

impl SchemeConfig {
    /// Defaults for everything except the listed physical parameters.
    pub fn new(n: usize, truncation: usize, nu: f64, horizon: f64, stage: u32) -> Self {
        SchemeConfig {
            n,
            truncation,
            l: 1.0,
            nu,
            horizon,
            stage,
            rho: 1.0,
            r: 1.0,
            lambda: 1.0,
            mu: 0.0,
            mode: default_mode(),
            control: default_control(),
            exp_tolerance: default_exp_tolerance(),
            max_exp_terms: default_max_exp_terms(),
            divergence_threshold: default_threshold(),
            snapshot_stride: None,
            norm_orders: default_norm_orders(),
            bound_s: default_bound_s(),
            dyson_quad_points: default_quad_points(),
        }
    }

    pub fn with_mode(mut self, mode: StepKind) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_control(mut self, control: Control) -> Self {
        self.control = control;
        self
    }

    pub fn with_stage(mut self, stage: u32) -> Self {
        self.stage = stage;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = Some(stride);
        self
    }

    pub fn with_scaling(mut self, rho: f64, r: f64) -> Self {
        self.rho = rho;
        self.r = r;
        self
    }

    /// `δt = T / 2^N`.
    pub fn dt(&self) -> f64 {
        self.horizon / (1u64 << self.stage) as f64
    }

    pub fn steps(&self) -> usize {
        1usize << self.stage
    }

    /// Nonlinear coefficient `ρr`.
    pub fn rho_r(&self) -> f64 {
        self.rho * self.r
    }

    /// Viscous time-scale factor `ρr²`.
    pub fn rho_r2(&self) -> f64 {
        self.rho * self.r * self.r
    }

    pub fn stride(&self) -> usize {
        self.snapshot_stride
            .unwrap_or_else(|| 1usize << self.stage.saturating_sub(6))
            .max(1)
    }

    /// Order of the norm watched for blow-up, `n/2 + 1`.
    pub fn watch_order(&self) -> f64 {
        self.n as f64 / 2.0 + 1.0
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive and finite, got {x}")))
            }
        };
        if self.n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        positive("l", self.l)?;
        positive("T", self.horizon)?;
        positive("rho", self.rho)?;
        positive("r", self.r)?;
        positive("exp_tolerance", self.exp_tolerance)?;
        positive("divergence_threshold", self.divergence_threshold)?;
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::param("nu", format!("must be non-negative, got {}", self.nu)));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::param("lambda", format!("must lie in (0, 1], got {}", self.lambda)));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::param("mu", format!("must be non-negative, got {}", self.mu)));
        }
        if self.stage > 40 {
            return Err(Error::param("N", format!("stage {} is too large", self.stage)));
        }
        if self.max_exp_terms == 0 {
            return Err(Error::param("max_exp_terms", "must be at least 1"));
        }
        if self.dyson_quad_points < 2 {
            return Err(Error::param("dyson_quad_points", "must be at least 2"));
        }
        if self.snapshot_stride == Some(0) {
            return Err(Error::param("snapshot_stride", "must be at least 1"));
        }
        if self.norm_orders.iter().any(|s| !s.is_finite()) {
            return Err(Error::param("norm_orders", "orders must be finite"));
        }
        Ok(())
    }
}
