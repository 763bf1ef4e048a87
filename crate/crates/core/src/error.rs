use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input: wrong shapes, non-symmetric or
    /// indefinite matrices, bad parameters.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A covariance matrix that violates the uncertainty relation.
    #[error("uncertainty relation violated: smallest symplectic eigenvalue {min_value:.6e} < 1/2")]
    Uncertainty { min_value: f64 },

    #[error("infeasible energy: E = {energy} is below the minimal energy {e_min}")]
    InfeasibleEnergy { energy: f64, e_min: f64 },

    /// The input-covariance maximizer does not dominate the noise vacuum,
    /// so no coherent-state ensemble attains the entropy bound.
    #[error("threshold condition violated: {0}")]
    Threshold(String),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(String),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
