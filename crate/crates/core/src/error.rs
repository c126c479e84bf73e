use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field diverged: non-finite coefficient in component {component} at mode index {mode}")]
    FieldDiverged { component: usize, mode: usize },

    #[error("truncation {requested} exceeds lattice truncation {available}")]
    TruncationTooLarge { requested: usize, available: usize },

    #[error("field not real: reality violation {violation:e} exceeds tolerance")]
    NotReal { violation: f64 },

    #[error("imaginary residue {residue:e} in physical evaluation")]
    ImaginaryResidue { residue: f64 },

    #[error("insufficient shells for decay fit: found {found}, need {needed}")]
    InsufficientShells { found: usize, needed: usize },

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("expm not converged after {terms} terms (last term norm {last_term:e})")]
    ExpmNotConverged { terms: usize, last_term: f64 },

    #[error("no contraction after {iterations} iterations; distance ratios {ratios:?}")]
    NoContraction { iterations: usize, ratios: Vec<f64> },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
