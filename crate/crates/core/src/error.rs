//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the segmentation pipeline and its building blocks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("ragged input: row {row} has {got} columns, expected {expected}")]
    RaggedRows {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("dimension mismatch: {context} (got {got}, expected {expected})")]
    DimensionMismatch {
        context: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("frame index {index} out of range for sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("sequence too short: need at least {min} frames, got {got}")]
    SequenceTooShort { min: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("segment count {got} outside valid range [1, {max}]")]
    SegmentCountOutOfRange { got: usize, max: usize },

    #[error("segmentations refer to different sequence lengths ({left} vs {right})")]
    MismatchedSequenceLength { left: usize, right: usize },

    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),

    #[error("invalid boundary {boundary} for sequence of length {len}")]
    InvalidBoundary { boundary: usize, len: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    // The display embeds the source, so the variant does not expose a
    // second copy through the error chain.
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
