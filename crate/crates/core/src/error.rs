use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or numerical parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A configuration value or combination is rejected before any work runs.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Mismatched dimensions between two coupled objects.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A sampling request cannot be satisfied by the available pool.
    #[error("sampling error: {0}")]
    Sampling(String),

    /// The training loss left the representable range.
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    /// A numerical computation produced non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),
}
