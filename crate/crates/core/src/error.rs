use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {what} = {value} is outside its admissible range")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("Newton solve did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular tridiagonal system (zero pivot at row {row})")]
    SingularSystem { row: usize },

    #[error("insufficient data for fit: {points} usable points, at least 3 required")]
    InsufficientData { points: usize },

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("empty window: mu = {mu} not in ({lo}, {hi})")]
    EmptyWindow { mu: f64, lo: f64, hi: f64 },

    #[error("no increasing steady state found for m = {m}, chi = {chi}")]
    NoSolution { m: f64, chi: f64 },

    #[error("trajectories are sampled at different times or sizes")]
    MismatchedSampling,

    #[error("initial amplitude {amplitude} exceeds min(M, 1 - M) = {limit}")]
    AmplitudeTooLarge { amplitude: f64, limit: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
