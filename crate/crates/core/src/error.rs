use thiserror::Error;

use crate::solver::CertifiedValue;

pub type Result<T> = std::result::Result<T, Error>;

/// Which density-matrix condition a candidate failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityViolation {
    Trace,
    Positivity,
    Hermiticity,
}

impl std::fmt::Display for DensityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Trace => "trace",
            Self::Positivity => "positivity",
            Self::Hermiticity => "hermiticity",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |a_ij - conj(a_ji)| = {0:e})")]
    NotHermitian(f64),

    #[error("spectrum is not strictly positive (min eigenvalue {0:e})")]
    NonPositiveSpectrum(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid bipartite dimensions {0}x{1}")]
    InvalidDims(usize, usize),

    #[error("not a density matrix: {0} condition violated")]
    NotDensityMatrix(DensityViolation),

    #[error("not a probability vector: {0}")]
    NotProbabilityVector(String),

    #[error("{name} = {value} is outside its domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("{what} did not converge within {iterations} iterations")]
    ConvergenceFailure { what: &'static str, iterations: usize },

    /// The solver ran out of iterations. The interval it carries is still
    /// sound, only wider than requested.
    #[error("solver stopped at max iterations with gap {:e}", .0.fw_gap)]
    NotConverged(Box<CertifiedValue>),

    #[error("state is not a member of the {0} set")]
    NotInSet(&'static str),

    #[error("rejection sampling exhausted after {0} consecutive draws")]
    SamplingExhausted(usize),

    #[error("malformed state file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
