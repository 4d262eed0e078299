use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distance must be strictly positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("potential has no term of order {0}")]
    MissingTerm(u32),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("time {t} is outside the trajectory horizon [0, {t_max})")]
    OutOfHorizon { t: f64, t_max: f64 },

    #[error("quadrature on [{a}, {b}] did not reach tolerance within {subdivisions} subdivisions (error estimate {error_estimate:e})")]
    QuadratureFailure {
        a: f64,
        b: f64,
        subdivisions: usize,
        error_estimate: f64,
    },

    #[error("invalid quadrature settings: {0}")]
    InvalidQuadrature(String),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("no sign change of the leading-term phase on the scan grid")]
    NoRootFound,

    #[error("invalid echo parameters: {0}")]
    InvalidEchoParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
