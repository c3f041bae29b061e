use thiserror::Error;

/// Errors raised by the library and mapped to exit codes by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside the supported range: {0}")]
    Domain(String),
    #[error("kernel evaluated at its singularity")]
    Singularity,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("missing state: {0}")]
    State(String),
    #[error("evaluation point at distance {distance:.3e} is closer than {limit:.3e} to the boundary")]
    Proximity { distance: f64, limit: f64 },
    #[error("single-layer system is singular (logarithmic capacity near one?); rescale the curve")]
    Capacity,
    #[error("near resonance: condition estimate {0:.3e}")]
    Resonance(f64),
    #[error("Neumann data violates compatibility: |mean flux| = {0:.3e}")]
    Compatibility(f64),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
