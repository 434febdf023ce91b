use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("matrix is not antisymmetric (max |X + Xᵀ| = {max_asymmetry:e})")]
    NotAntisymmetric { max_asymmetry: f64 },

    #[error("matrix is not a proper rotation: {0}")]
    NotRotation(String),

    #[error("invalid covariance matrix: {0}")]
    InvalidCovariance(String),

    #[error("covariance matrix is not pure (max |MᵀM - I| = {defect:e})")]
    NotPure { defect: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("ground state is degenerate (smallest single-particle energy {energy:e})")]
    DegenerateGroundState { energy: f64 },

    /// Majorana pair indices must satisfy `j < k`.
    #[error("invalid index order: expected j < k, got ({j}, {k})")]
    InvalidIndexOrder { j: usize, k: usize },

    #[error("index {index} out of range for {modes} modes")]
    IndexOutOfRange { index: usize, modes: usize },

    #[error("invalid chain parameters: {0}")]
    InvalidChain(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("support set is empty")]
    EmptySupport,

    #[error("pair ({j}, {k}) is not in the support of the target")]
    PairNotInSupport { j: usize, k: usize },

    #[error("pair ({j}, {k}) of the support was never measured")]
    IncompleteSupport { j: usize, k: usize },

    #[error("records mix the importance and entrywise schemes")]
    MixedSchemeError,

    #[error("no measurement records")]
    EmptyInput,

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("system of {modes} modes exceeds the exact-oracle cap of {cap}")]
    OracleCapExceeded { modes: usize, cap: usize },

    #[error("invalid witness decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("operator is not unitary (max |UU† - I| = {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
