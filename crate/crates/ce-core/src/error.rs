//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by the certification kernels.
///
/// Numerical *check failures* (a residual exceeding its tolerance inside a
/// certificate) are not errors; they are recorded in the returned
/// certificates. Errors signal inputs that violate a contract: mismatched
/// dimensions, non-Hermitian data fed to a PSD decision, a map used before
/// certification, and so on.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("ragged block array: all blocks must be square with equal dimension")]
    RaggedBlocks,

    #[error("matrix is not Hermitian: residual {residual:.3e}")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },

    #[error("map is not completely positive: Choi min eigenvalue {min_eig:.3e}")]
    NotCp { min_eig: f64 },

    #[error("Kraus operator list is empty")]
    EmptyKraus,

    #[error("map lacks the required certificate: {missing}")]
    UncertifiedMap { missing: &'static str },

    #[error("matrix is not unitary: residual {residual:.3e}")]
    NotUnitary { residual: f64 },

    #[error("unitary list is not a group: {reason}")]
    NotAGroup { reason: String },

    #[error("invalid partition: {reason}")]
    InvalidPartition { reason: String },

    #[error("Cesaro averaging did not converge after {rounds} doubling rounds (last delta {last_delta:.3e})")]
    NoConvergence { rounds: usize, last_delta: f64 },

    #[error("averaged map failed the idempotency gate: residual {residual:.3e}")]
    IdempotencyFailed { residual: f64 },

    #[error("instance generation exhausted {attempts} attempts: {last}")]
    RetriesExhausted { attempts: usize, last: String },

    #[error("ambient dimension {n} outside the supported range {min}..={max}")]
    UnsupportedDimension { n: usize, min: usize, max: usize },

    #[error("span closure did not stabilize within {max_rounds} rounds")]
    MaxRoundsExceeded { max_rounds: usize },

    #[error("range of the map is zero-dimensional")]
    EmptyRange,

    #[error("word must contain at least one letter")]
    EmptyWord,

    #[error("word letter {index} is not in the range of the map: residual {residual:.3e}")]
    LetterNotInRange { index: usize, residual: f64 },

    #[error("operand is not in the range of the map: residual {residual:.3e}")]
    NotInRange { residual: f64 },

    #[error("no unit element solves the range-product unit equations: residual {residual:.3e}")]
    NoUnit { residual: f64 },

    #[error("range-product associativity failed: residual {residual:.3e}")]
    AssociativityFailed { residual: f64 },

    #[error("subspace is not closed as a *-algebra: {reason}")]
    NotAnAlgebra { reason: String },

    #[error("central eigenvalue clustering stayed ambiguous after {attempts} reseeds")]
    ClusterAmbiguity { attempts: usize },

    #[error("block {block} is neither inside the ideal nor disjoint from it (in {in_residual:.3e} / out {out_residual:.3e})")]
    BlockSplitError {
        block: usize,
        in_residual: f64,
        out_residual: f64,
    },

    #[error("kernel and ideal disagree (gap {gap:.3e}); quotient construction refused")]
    KernelIdealMismatch { gap: f64 },

    #[error("quotient dimension {dim_b} does not match range dimension {dim_r}")]
    QuotientMismatch { dim_b: usize, dim_r: usize },

    #[error("failed to sample a certified test element: {reason}")]
    SamplingFailed { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
