use thiserror::Error;

/// Errors produced by the moyalks library.
#[derive(Debug, Error, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid phase space: {0}")]
    InvalidSpace(String),

    #[error("observables live on different phase spaces")]
    MismatchedSpace,

    /// The spectrum of a grid field carries too much energy near the Nyquist band.
    #[error("spectrum not resolved: outer-band energy fraction {fraction:.3e} exceeds {threshold:.1e}")]
    Resolution { fraction: f64, threshold: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical stability: {0}")]
    Stability(String),

    /// Too few samples for the requested itinerary depth.
    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("degenerate fit: deviation below {floor:.1e} at every hbar")]
    DegenerateFit { floor: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
