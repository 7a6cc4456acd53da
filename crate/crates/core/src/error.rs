use std::fmt;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Density-matrix property that failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    Square,
    Hermiticity,
    Trace,
    Positivity,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariant::Square => "square shape",
            Invariant::Hermiticity => "hermiticity",
            Invariant::Trace => "unit trace",
            Invariant::Positivity => "positivity",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid density matrix: {invariant} violated by {amount:.3e}")]
    InvalidDensity { invariant: Invariant, amount: f64 },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("linear-response regime exceeded: minimum eigenvalue deficit {deficit:.3e}")]
    RegimeExceeded { deficit: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
