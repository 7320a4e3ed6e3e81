use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of bounds (length {len})")]
    OutOfBounds { index: usize, len: usize },

    #[error("no {bit}-bit with ordinal {ordinal} (only {available} present)")]
    NotFound {
        bit: u8,
        ordinal: usize,
        available: usize,
    },

    #[error("value {value} does not fit in {width} bits")]
    ValueTooWide { value: u64, width: u32 },

    #[error("invalid bit width {0} (expected 1..=64)")]
    InvalidWidth(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid arity k={0} (expected 2..=255)")]
    InvalidArity(usize),

    #[error("side {side} is not a power of k={k}")]
    NotPowerOfK { side: usize, k: usize },

    #[error("region {0} out of bounds")]
    RegionOutOfBounds(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("position {0} is not an internal node")]
    NotInternal(usize),

    #[error("position {0} has no parent")]
    NoParent(usize),

    #[error("position {pos} at depth {depth} is not a back-reference leaf")]
    NotBackReference { pos: usize, depth: u32 },

    #[error("node {node} out of logical bounds ({limit})")]
    NodeOutOfBounds { node: usize, limit: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty input")]
    EmptyInput,

    #[error("bad image: {0}")]
    Image(String),

    #[error("bad container: {0}")]
    Format(String),

    #[error("containers describe different matrices: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
