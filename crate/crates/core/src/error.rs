use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gamma function is only evaluated for x > 0 (got {0})")]
    GammaDomain(f64),

    #[error("history level {wanted} (half-index) not available; {available} half levels stored")]
    MissingLevel { wanted: usize, available: usize },

    #[error("stencil index {j} outside the interior range 2..={max}")]
    StencilRange { j: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular pentadiagonal system at pivot row {row}{}", step_suffix(*.step))]
    SingularMatrix { row: usize, step: Option<usize> },

    #[error("quadrature did not reach tolerance {target:e} (achieved {achieved:e})")]
    Quadrature { target: f64, achieved: f64 },

    #[error("time {t} outside the problem's time domain [0, {horizon}]")]
    TimeDomain { t: f64, horizon: f64 },

    #[error("non-finite {what} at x = {x}, t = {t}")]
    NonFinite { what: &'static str, x: f64, t: f64 },

    #[error("problem `{0}` has no exact solution")]
    MissingExact(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("plot error: {0}")]
    Plot(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn step_suffix(step: Option<usize>) -> String {
    step.map(|s| format!(" (time step {s})")).unwrap_or_default()
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a time-step index to a solver failure.
    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            Error::SingularMatrix { row, .. } => Error::SingularMatrix {
                row,
                step: Some(step),
            },
            other => other,
        }
    }
}
