use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("direction at angle {angle} is not a facet normal of the Wulff shape")]
    NotAFacet { angle: f64 },

    #[error("singular linear map (det = {det:e})")]
    SingularMap { det: f64 },

    #[error("linear map is ill-conditioned (cond = {cond:e}, limit 1e6)")]
    IllConditioned { cond: f64 },

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    StabilityViolation { dt: f64, bound: f64 },

    #[error("state corruption: facet {facet} has non-positive length {length:e}")]
    StateCorruption { facet: usize, length: f64 },

    #[error("degenerate edge at vertex {0}")]
    DegenerateEdge(usize),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("evolution stalled: {0}")]
    Stalled(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::StabilityViolation { .. }
            | Error::StateCorruption { .. }
            | Error::DegenerateEdge(_)
            | Error::UnsupportedTopology(_)
            | Error::Stalled(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
