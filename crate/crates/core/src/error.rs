use thiserror::Error;

use crate::collinear::Ordering;
use crate::constraints::ConstraintReport;
use crate::trapezoid5::TrapezoidSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pair ({i},{j}) is not a valid pair of bodies for n = {n}")]
    Index { i: usize, j: usize, n: usize },

    #[error("degenerate configuration: bodies {0} and {1} coincide")]
    DegenerateConfiguration(usize, usize),

    #[error("Cayley-Menger determinant needs at least 3 bodies, got {0}")]
    Arity(usize),

    #[error("value {value:e} has the wrong sign for a realizable {k}-point simplex")]
    NonRealizable { value: f64, k: usize },

    #[error("distance r_{i}{j} = {value:e} is not strictly positive")]
    Singularity { i: usize, j: usize, value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual norm {residual_norm:e})")]
    NonConvergence { iterations: usize, residual_norm: f64 },

    #[error("Jacobian is numerically singular at iteration {iteration}")]
    SingularSystem { iteration: usize },

    #[error("converged point lies outside the trapezoid configuration space: {reason}")]
    InvalidRegion { reason: String, solution: Box<TrapezoidSolution>, report: Box<ConstraintReport> },

    #[error("classification failed: {}", violated.join("; "))]
    Classification { violated: Vec<String> },

    #[error("oriented area of bodies {0:?} vanishes, multiplier is undefined")]
    CollinearDegeneracy([usize; 3]),

    #[error("converged gap {index} = {value:e} is not positive for ordering {ordering}")]
    InvalidOrdering { ordering: Ordering, index: usize, value: f64 },

    #[error("collinear invariant violated for ordering {ordering}: {reason}")]
    CollinearInvariant { ordering: Ordering, reason: String },

    #[error("{} of the orderings failed to converge (first: {})", failed.len(), failed.first().map(|o| o.to_string()).unwrap_or_default())]
    EnumerationIncomplete { failed: Vec<Ordering> },

    #[error("position reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 1 non-convergence, 2 classification or invariant
    /// failure, 3 usage or input error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } | Error::SingularSystem { .. } | Error::EnumerationIncomplete { .. } => 1,
            Error::InvalidRegion { .. }
            | Error::Classification { .. }
            | Error::CollinearDegeneracy(_)
            | Error::InvalidOrdering { .. }
            | Error::CollinearInvariant { .. }
            | Error::Reconstruction(_)
            | Error::NonRealizable { .. } => 2,
            _ => 3,
        }
    }
}
