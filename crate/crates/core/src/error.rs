use thiserror::Error;

use crate::tableau::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tableau structure: {0}")]
    Structural(String),

    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("scheme `{name}` (line {line}) failed validation: {}", format_violations(.violations))]
    Validation {
        name: String,
        line: usize,
        violations: Vec<Violation>,
    },

    #[error("scheme `{0}` is a registry slot without coefficients")]
    EmptySlot(String),

    #[error("scheme `{0}` not found in registry")]
    UnknownScheme(String),

    #[error("unclassifiable tableau: {0}")]
    Unclassifiable(String),

    #[error("insufficient ghost width: need {needed}, have {have}")]
    InsufficientGhosts { needed: usize, have: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("singular system: zero pivot at row {row}")]
    Singular { row: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("inadmissible state: {0}")]
    State(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scalar solve did not converge after {iterations} iterations (trace: {trace:?})")]
    NewtonFailed { iterations: usize, trace: Vec<f64> },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("solution blew up at t = {time}")]
    BlowUp { time: f64 },

    #[error("degenerate stencil: {0}")]
    DegenerateStencil(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
