use thiserror::Error;

use crate::group::GroupViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("invalid block shape: {0}")]
    InvalidShape(String),

    #[error("invalid tracial state: {0}")]
    InvalidTrace(String),

    #[error("element is not central: block {block} is not a scalar multiple of the identity (deviation {deviation:e})")]
    NotCentral { block: usize, deviation: f64 },

    #[error("element for group element {g} is not supported on the required ideal; offending blocks {blocks:?}")]
    DomainViolation { g: usize, blocks: Vec<usize> },

    #[error("invalid group table: {0:?}")]
    InvalidGroup(Vec<GroupViolation>),

    #[error("invalid partial action: {0}")]
    InvalidAction(String),

    #[error("trace is not invariant under the partial action: {0}")]
    NonInvariantTrace(String),

    #[error("trace is not faithful")]
    NotFaithful,

    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),

    #[error("precondition failed: {what} (certificate {certificate:e})")]
    Precondition { what: String, certificate: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
