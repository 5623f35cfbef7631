use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("log-integral inconclusive at depth {depth} on arc starting at {start}")]
    InconclusiveAtDepth { start: f64, depth: u32 },
    #[error("density is not integrable over the requested set")]
    DivergentDensity,
    #[error("log-modulus is not integrable")]
    DivergentLogModulus,
    #[error("measure has an absolutely continuous part")]
    RejectDensity,
    #[error("measure has total mass {0}, expected 1")]
    MassNotOne(f64),
    #[error("evaluation point within {0:e} of the singular support")]
    NearSingularSupport(f64),
    #[error("ill-conditioned: r^-N = {0:e} exceeds 1e12")]
    IllConditioned(f64),
    #[error("degree mismatch: series has degree {series}, moments up to {moments}")]
    DegreeMismatch { series: usize, moments: usize },
    #[error("sequence is not admissible: {0}")]
    NotAdmissible(String),
    #[error("not a majorant: {0}")]
    NotAMajorant(String),
    #[error("no detected non-core point in cell {cell} at level {level}")]
    NoObstaclePoint { level: u32, cell: usize },
    #[error("mass match failed in cell {cell}: residual {residual:e}")]
    MassMatchFailure { cell: usize, residual: f64 },
    #[error("{failed} of {walks} walks exceeded the step budget")]
    NonConvergedWalks { failed: u64, walks: u64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    /// CLI exit code class: 2 input, 3 inconclusive, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InconclusiveAtDepth { .. } => 3,
            Error::MassMatchFailure { .. }
            | Error::IllConditioned(_)
            | Error::NonConvergedWalks { .. }
            | Error::DivergentDensity
            | Error::DivergentLogModulus => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
