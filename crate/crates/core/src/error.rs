use thiserror::Error;

/// Errors raised while configuring or evaluating the noise model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The optomechanical system has a pole in the unstable half plane, so no
    /// stationary spectrum exists.
    #[error("optomechanical system is unstable: {reason}")]
    Unstable { reason: String },

    #[error("singular transfer matrix at {freq_hz} Hz")]
    Singular { freq_hz: f64 },

    #[error("frequency grid is empty")]
    EmptyGrid,

    #[error("frequency grid is not strictly increasing at index {index}")]
    NonIncreasingGrid { index: usize },

    #[error("band [{lo}, {hi}] Hz is not inside the grid [{grid_lo}, {grid_hi}] Hz")]
    BandOutsideGrid { lo: f64, hi: f64, grid_lo: f64, grid_hi: f64 },

    /// Measured calibration heights fall outside the linear response model.
    #[error("calibration input outside model domain: {0}")]
    CalibrationDomain(String),

    #[error("fit has no interior minimum: {0}")]
    NoBracket(String),

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::InvalidParameter { name, reason: reason.into() }
}
