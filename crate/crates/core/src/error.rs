use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has {values} values but {ids} node ids")]
    IdCountMismatch { values: usize, ids: usize },
    #[error("asymmetric entry at ({i}, {j}): |m_ij - m_ji| = {diff:e}")]
    Asymmetry { i: usize, j: usize, diff: f64 },
    #[error("negative entry {value} at ({i}, {j})")]
    NegativeEntry { i: usize, j: usize, value: f64 },
    #[error("non-finite entry at ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("node ids are not aligned: {0}")]
    Alignment(String),
    #[error("articles without any feature: {}", .0.join(", "))]
    EmptyArticle(Vec<String>),
    #[error("row `{0}` has zero total weight")]
    ZeroRow(String),
    #[error("every term was removed by the vocabulary filter")]
    AllTermsRemoved,
    #[error("invalid filter parameter: {0}")]
    InvalidFilter(String),
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("row {row} has zero weight over its nearest neighbours")]
    DegenerateNeighborhood { row: usize },
    #[error("both matrices have zero total mass")]
    ZeroMass,
    #[error("entry {value} at ({i}, {j}) lies outside [-1, 1]")]
    Domain { i: usize, j: usize, value: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("at least {needed} samples required, got {got}")]
    InsufficientSample { needed: usize, got: usize },
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("invalid planted spec: {0}")]
    Spec(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
