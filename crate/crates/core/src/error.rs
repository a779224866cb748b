use thiserror::Error;

use crate::file::FileId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cache capacity must be at least 1")]
    InvalidCapacity,

    #[error("file {id} has size {size}; sizes must be positive")]
    InvalidSize { id: FileId, size: u64 },

    #[error("file {id} has negative cost")]
    NegativeCost { id: FileId },

    #[error("file {id} appears with conflicting size/cost (request {index})")]
    InconsistentFile { id: FileId, index: usize },

    #[error("request {index:?} for {id} (size {size}) exceeds cache capacity {capacity}")]
    RequestTooLarge {
        id: FileId,
        size: u64,
        capacity: u64,
        index: Option<usize>,
    },

    #[error("the pessimal selector needs knowledge of future requests")]
    MissingLookahead,

    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),

    #[error("cache sizes must satisfy 1 <= h <= k (got h={h}, k={k})")]
    InvalidSizes { h: u64, k: u64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("n = {n} is too small for the construction; smallest feasible n is {minimal}")]
    NTooSmall { n: u64, minimal: u64 },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("line {line}: file {id} redeclared with a different size or cost")]
    Consistency { line: usize, id: FileId },

    #[error(transparent)]
    Rational(#[from] ParseRationalError),
}

pub type Result<T> = std::result::Result<T, Error>;
