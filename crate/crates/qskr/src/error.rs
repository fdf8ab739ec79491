//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by the rate, channel, and optimization layers.
#[derive(Debug, Error)]
pub enum QskrError {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A symplectic eigenvalue fell below 1 by more than the rounding
    /// envelope, indicating an inconsistent Gaussian state rather than
    /// floating-point noise.
    #[error("nonphysical state: {what} = {value} (< 1 - 1e-9)")]
    NonphysicalState { what: &'static str, value: f64 },

    /// The characteristic-equation discriminant went negative beyond
    /// the rounding envelope.
    #[error("numerical domain error: discriminant {disc} < 0 beyond tolerance (A = {a})")]
    NegativeDiscriminant { disc: f64, a: f64 },

    /// Every-user transmittance must stay inside (0, 1].
    #[error("degenerate channel: user {user} has transmittance {t}")]
    DegenerateChannel { user: usize, t: f64 },

    /// The power-limit constraints admit no allocation.
    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    /// Quadrature was requested for a dimension it does not support.
    #[error("unsupported dimension: quadrature supports K <= {max}, got K = {got}")]
    UnsupportedDimension { max: usize, got: usize },

    /// An error from a per-user computation, with the user index attached.
    #[error("user {user}: {source}")]
    ForUser {
        user: usize,
        #[source]
        source: Box<QskrError>,
    },

    /// Configuration-file problems (key, line number, reason).
    #[error("config error at line {line}, key `{key}`: {msg}")]
    Config {
        line: usize,
        key: String,
        msg: String,
    },

    /// I/O failures while reading configs or writing results.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl QskrError {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        QskrError::Domain {
            op,
            msg: msg.into(),
        }
    }

    /// Attach a user index to an error coming out of a per-user computation.
    pub fn for_user(self, user: usize) -> Self {
        QskrError::ForUser {
            user,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, QskrError>;
