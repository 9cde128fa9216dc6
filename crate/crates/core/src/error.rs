use thiserror::Error;

/// Errors surfaced by the invariant pipeline.
///
/// Most of these indicate inconsistent input data (a non-invariant
/// character, a degenerate triangulation move) rather than numerical
/// failure; the messages name the offending object where possible.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("monomial is central; eigendata/functional calculus undefined")]
    CentralMonomial,
    #[error("functional calculus is missing a value on root {0}")]
    MissingRootValue(usize),
    #[error("central characters differ on lattice vector {0:?} (|ratio-1| = {1})")]
    CentralCharacterMismatch(Vec<i64>, String),
    #[error("representation does not act diagonally on the requested family")]
    NonDiagonalAction,
    #[error("edge {0} is not flippable (adjacent faces coincide)")]
    UnflippableEdge(usize),
    #[error("relabeling does not identify the final triangulation with the initial one: {0}")]
    RelabelingMismatch(String),
    #[error("Newton iteration failed to converge: {0}")]
    NonConvergence(String),
    #[error("gluing system is rank deficient")]
    RankDeficient,
    #[error("degenerate shear-bend coordinate (t = -1 or t = 0) at {0}")]
    DegenerateShear(String),
    #[error("no invariant decoration found: {0}")]
    NoInvariantDecoration(String),
    #[error("operator leaks outside the puncture-weight block pattern (mass {0})")]
    BlockLeakage(String),
    #[error("operator is singular; trace normalization undefined")]
    SingularOperator,
    #[error("lattice map is not compatible with the skew forms")]
    FormIncompatible,
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("invalid input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
