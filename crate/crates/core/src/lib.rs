//! Compressed binary matrices: k²-trees and two-dimensional block trees.
//!
//! Both structures implement [`CompressedMatrix`], which answers cell,
//! region and neighbor queries directly on the compressed form.

pub mod bench;
pub mod bt2d;
pub mod cli;
pub mod container;
pub mod error;
pub mod fingerprint;
pub mod fixtures;
pub mod k2tree;
pub mod matrix;
pub mod query;
pub mod succinct;

pub use bt2d::{BuildParams, TwoDBlockTree};
pub use error::{Error, Result};
pub use k2tree::K2Tree;
pub use matrix::{BitGrid, BitMatrix, Region};
pub use query::CompressedMatrix;
