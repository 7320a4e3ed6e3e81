use crate::error::{Error, Result};
use crate::matrix::{BitGrid, Region};

/// Read-only queries shared by every compressed representation.
pub trait CompressedMatrix {
    fn k(&self) -> usize;
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// Padded side, a power of `k`.
    fn side(&self) -> usize;

    /// Dense copy of the cells inside `r`.
    fn region(&self, r: &Region) -> Result<BitGrid>;

    /// Serialized payload size in bits.
    fn total_bits(&self) -> usize;

    fn cell(&self, x: usize, y: usize) -> Result<bool> {
        Ok(self.region(&Region::cell(x, y))?.get(0, 0))
    }

    /// Out-neighbors of `node`: the set columns of row `node`, ascending.
    fn direct_neighbors(&self, node: usize) -> Result<Vec<usize>> {
        if node >= self.rows() {
            return Err(Error::NodeOutOfBounds {
                node,
                limit: self.rows(),
            });
        }
        let row = self.region(&Region::row(node, self.side()))?;
        Ok(row.ones().collect())
    }

    /// In-neighbors of `node`: the set rows of column `node`, ascending.
    fn reverse_neighbors(&self, node: usize) -> Result<Vec<usize>> {
        if node >= self.cols() {
            return Err(Error::NodeOutOfBounds {
                node,
                limit: self.cols(),
            });
        }
        let col = self.region(&Region::column(node, self.side()))?;
        Ok(col.ones().collect())
    }
}
