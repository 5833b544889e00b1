use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration diverged after grid node {last_valid}")]
    IntegrationDiverged { last_valid: usize },

    #[error("frame matrix is singular (l_t + l_r cos phi0 = {denominator:e})")]
    FrameSingular { denominator: f64 },

    #[error("steering failed: best residual {best_residual:e} over {starts} starts")]
    SteeringFailed { best_residual: f64, starts: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
