use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge: achieved relative error {achieved:.3e} (target {target:.3e}), value {value}")]
    QuadratureNonConvergence { value: f64, achieved: f64, target: f64 },

    #[error("truncation tail not under control at R = {radius}: partial value {partial}, tail slope {tail_slope:.3}")]
    TailNotControlled { partial: f64, radius: f64, tail_slope: f64 },

    #[error("non-finite state at t = {time} (blow-up estimate t* ≈ {blowup_estimate})")]
    NonFinite { time: f64, blowup_estimate: f64 },

    #[error("Picard iteration outside contraction regime: residuals {residuals:?}")]
    OutsideContraction { residuals: Vec<f64> },

    #[error("regression input invalid: {0}")]
    Regression(String),

    #[error("configuration invalid:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),
}

impl LabError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        LabError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
