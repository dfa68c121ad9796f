use thiserror::Error;

/// Errors produced by tensor construction and the normal-form / monotone
/// machinery. Party indices in messages are zero-based.
#[derive(Debug, Error)]
pub enum MpnfError {
    #[error("party {party}: operator is {got_rows}x{got_cols}, state dimension is {expected}")]
    DimensionMismatch {
        party: usize,
        expected: usize,
        got_rows: usize,
        got_cols: usize,
    },

    #[error("party index {party} out of range (state has {count} parties)")]
    InvalidParty { party: usize, count: usize },

    #[error("entry count mismatch: expected {expected}, got {got}")]
    EntryCountMismatch { expected: usize, got: usize },

    #[error("state dimensions are invalid: {0}")]
    InvalidDims(String),

    #[error("non-finite entry encountered (NaN or Inf)")]
    NonFinite,

    #[error("matrix is not hermitian (deviation {deviation:.3e} exceeds tolerance {tol:.3e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("operator for party {party} violates the `{flavor}` flag (deviation {deviation:.3e})")]
    FlavorViolation {
        party: usize,
        flavor: &'static str,
        deviation: f64,
    },

    #[error("reduced operator of party {0} is rank deficient")]
    RankDeficient(usize),

    #[error("state has zero trace/norm")]
    ZeroState,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("operation requires a converged normal form (status was {0})")]
    NotConverged(String),

    #[error("monotone spec is invalid: {0}")]
    InvalidMonotoneSpec(String),

    #[error("unknown monotone id `{0}`")]
    UnknownMonotone(String),

    #[error("unknown canonical state `{0}`")]
    UnknownState(String),

    #[error("malformed input JSON: {0}")]
    Json(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, MpnfError>;
