use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("spectrum value at node {index} is {value}; expected a finite nonnegative number")]
    InvalidSpectrum { index: usize, value: f64 },

    #[error("spectrum lives on a different grid than the operator")]
    GridMismatch,

    #[error("empty resonant manifold: exact resonances require lambda1 = 0 (got {lambda1})")]
    EmptyResonantManifold { lambda1: f64 },

    #[error("exact-resonance mode needs a uniform grid starting at r = 0")]
    NonUniformGrid,

    #[error("time step {dt} exceeds the positivity bound {limit}")]
    UnstableStep { dt: f64, limit: f64 },

    #[error("iterate became negative at node {index} (t = {t})")]
    PositivityLost { index: usize, t: f64 },

    #[error("initial condition outside S0: {0}")]
    Inadmissible(String),

    #[error("malformed ledger: {0}")]
    MalformedLedger(String),

    #[error("{0}")]
    Verify(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn param(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
