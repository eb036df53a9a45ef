use thiserror::Error;

/// Unified error type for layout construction, channel synthesis, and
/// experiment execution.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range. The message names the
    /// offending field and the constraint it violates.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Geometry that cannot be realized, e.g. an element pitch wider than
    /// the cylinder diameter.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A hop of a reflected path is shorter than the far-field guard
    /// distance for the plane-wave channel model.
    #[error("near-field violation: hop distance {distance_m:.3} m is below the {limit_m:.3} m far-field guard")]
    NearField { distance_m: f64, limit_m: f64 },

    /// Vehicle placement failed after exhausting the rejection-sampling
    /// retry budget (the road is too crowded for the requested density).
    #[error("vehicle placement failed: {0}")]
    Placement(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
