use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid invalid: {0}")]
    InvalidGrid(String),
    #[error("radius profile is not positive: rho = {value} at node {node}")]
    NonPositiveRadius { node: usize, value: f64 },
    #[error("sinusoidal wavenumber {wavenumber} does not close periodically on a domain of length {length}")]
    PeriodicityMismatch { wavenumber: f64, length: f64 },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid stepper configuration: {0}")]
    InvalidStepper(String),
    #[error("linear solve did not converge in {iterations} iterations (relative residual {residual:e})")]
    LinearSolveDiverged { iterations: usize, residual: f64 },
    #[error("non-finite state detected; the time step is likely too large")]
    NonFiniteState,
    #[error("at t = {time}: {source}")]
    AtTime {
        time: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("no level crossing found in the fit window")]
    NoCrossing,
    #[error("front came within 10% of the periodic seam at t = {time} (x = {position})")]
    WrapDetected { time: f64, position: f64 },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("insufficient data: {have} samples above the floor, need at least {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("trajectories are not sampled on a common time grid: {0}")]
    TimeGridMismatch(String),
    #[error("snapshot format: {0}")]
    Snapshot(String),
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
