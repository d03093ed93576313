//! Error types shared across the crate.

use thiserror::Error;

/// Errors surfaced by the simulation, control and learning layers.
#[derive(Debug, Error)]
pub enum Error {
    /// The attitude left the valid operating region of the Euler-angle
    /// rate transform (|theta| too close to pi/2).
    #[error("singular attitude: |theta| = {theta_abs:.6} rad is within the guard band of pi/2")]
    SingularAttitude { theta_abs: f64 },

    /// The assembled mass matrix is not positive definite, which means the
    /// coefficient set is unusable.
    #[error("mass matrix is not positive definite; check the coefficient file")]
    NonPositiveDefinite,

    /// A state component blew past the divergence guard during integration.
    #[error("numerical divergence: state component reached {value:.3e}")]
    NumericalDivergence { value: f64 },

    /// An input vector had the wrong dimension for the network or mode.
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    /// The training loss became non-finite; the update must be aborted.
    #[error("non-finite loss encountered during optimization")]
    NonFiniteLoss,

    /// Invalid configuration, coefficient file or checkpoint contents.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
