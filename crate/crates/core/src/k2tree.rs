//! The k²-tree baseline.
//!
//! The tree has a conceptual root covering the whole matrix that is never
//! stored: `T` opens with the root's k² children and lists every level except
//! the last in levelwise order; `L` holds the cell bits of the last level.
//!
//! With exclusive rank, the children of an internal position `p` start at
//! `rank1(T, p + 1) * k²` in `T:L`, and the parent of any `p >= k²` is
//! `select1(T, p / k²)`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::matrix::{log_k, BitGrid, BitMatrix, Region};
use crate::query::CompressedMatrix;
use crate::succinct::{BitVecBuilder, BitVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct K2Tree {
    k: usize,
    rows: usize,
    cols: usize,
    side: usize,
    height: u32,
    tree: BitVector,
    leaves: BitVector,
}

impl K2Tree {
    pub fn build(m: &BitMatrix) -> Result<Self> {
        let k = m.k();
        let side = m.side();
        let height = log_k(side, k)?;
        let mut tree = BitVecBuilder::new();
        let mut leaves = BitVecBuilder::new();
        // origins of the internal nodes of the previous level
        let mut internal = vec![(0usize, 0usize)];
        let mut s = side;
        for depth in 1..=height {
            s /= k;
            let mut next = Vec::new();
            for &(px, py) in &internal {
                for i in 0..k * k {
                    let (x, y) = (px + (i % k) * s, py + (i / k) * s);
                    if depth == height {
                        leaves.push(m.get(x, y));
                    } else if m.is_zero_region(&Region::square(x, y, s)) {
                        tree.push(false);
                    } else {
                        tree.push(true);
                        next.push((x, y));
                    }
                }
            }
            internal = next;
        }
        Ok(Self {
            k,
            rows: m.rows(),
            cols: m.cols(),
            side,
            height,
            tree: tree.build(),
            leaves: leaves.build(),
        })
    }

    /// Reassembles a tree from its bitvectors, checking that the level
    /// structure is consistent.
    pub fn from_parts(
        k: usize,
        rows: usize,
        cols: usize,
        side: usize,
        tree: BitVector,
        leaves: BitVector,
    ) -> Result<Self> {
        let height = log_k(side, k)?;
        if rows == 0 || cols == 0 || rows > side || cols > side {
            return Err(Error::Format(format!(
                "logical size {rows}x{cols} does not fit side {side}"
            )));
        }
        let expected_leaves = level_sizes(&tree, k, height)?;
        if leaves.len() != expected_leaves {
            return Err(Error::Format(format!(
                "L has {} bits, the tree shape needs {expected_leaves}",
                leaves.len()
            )));
        }
        Ok(Self {
            k,
            rows,
            cols,
            side,
            height,
            tree,
            leaves,
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn tree(&self) -> &BitVector {
        &self.tree
    }

    pub fn leaves(&self) -> &BitVector {
        &self.leaves
    }

    /// Bit of `T:L` at position `p`.
    fn bit(&self, p: usize) -> bool {
        if p < self.tree.len() {
            self.tree.get(p)
        } else {
            self.leaves.get(p - self.tree.len())
        }
    }

    /// Positions in `T:L` of the k² children of the internal node at `p`.
    pub fn children(&self, p: usize) -> Result<Range<usize>> {
        if p >= self.tree.len() || !self.tree.get(p) {
            return Err(Error::NotInternal(p));
        }
        let start = self.tree.rank1(p + 1) * self.k * self.k;
        Ok(start..start + self.k * self.k)
    }

    /// Position of the parent of `p`; the root's children have none.
    pub fn parent(&self, p: usize) -> Result<usize> {
        let kk = self.k * self.k;
        let total = self.tree.len() + self.leaves.len();
        if p >= total {
            return Err(Error::OutOfBounds {
                index: p,
                len: total,
            });
        }
        if p < kk {
            return Err(Error::NoParent(p));
        }
        self.tree.select(true, p / kk)
    }

    pub fn cell(&self, x: usize, y: usize) -> Result<bool> {
        Region::cell(x, y).check_within(self.side)?;
        let k = self.k;
        let mut s = self.side;
        let mut start = 0;
        let (mut x, mut y) = (x, y);
        for depth in 1..=self.height {
            s /= k;
            let p = start + (y / s) * k + x / s;
            x %= s;
            y %= s;
            if depth == self.height {
                return Ok(self.bit(p));
            }
            if !self.tree.get(p) {
                return Ok(false);
            }
            start = self.tree.rank1(p + 1) * k * k;
        }
        unreachable!("height is at least one")
    }

    /// Top-down traversal writing the set cells of `r` into a zeroed grid.
    pub fn region(&self, r: &Region) -> Result<BitGrid> {
        r.check_within(self.side)?;
        let k = self.k;
        let mut out = BitGrid::zeroed(r.width(), r.height());
        // (first child position, child depth, parent origin, parent side)
        let mut stack = vec![(0usize, 1u32, 0usize, 0usize, self.side)];
        while let Some((start, depth, px, py, ps)) = stack.pop() {
            let s = ps / k;
            for i in 0..k * k {
                let child = Region::square(px + (i % k) * s, py + (i / k) * s, s);
                if !child.intersects(r) {
                    continue;
                }
                let p = start + i;
                if depth == self.height {
                    if self.bit(p) {
                        out.set(child.x_min - r.x_min, child.y_min - r.y_min);
                    }
                } else if self.tree.get(p) {
                    let next = self.tree.rank1(p + 1) * k * k;
                    stack.push((next, depth + 1, child.x_min, child.y_min, s));
                }
            }
        }
        Ok(out)
    }

    pub fn total_bits(&self) -> usize {
        self.tree.len() + self.leaves.len()
    }
}

/// Walks the levels of `T` and returns the number of `L` bits its shape
/// implies.
fn level_sizes(tree: &BitVector, k: usize, height: u32) -> Result<usize> {
    let kk = k * k;
    let mut start = 0;
    let mut count = kk;
    for _ in 1..height {
        if start + count > tree.len() {
            return Err(Error::Format(format!(
                "T ends at {} inside a level spanning [{start}, {})",
                tree.len(),
                start + count
            )));
        }
        let ones = tree.rank1(start + count) - tree.rank1(start);
        start += count;
        count = ones * kk;
    }
    if start != tree.len() {
        return Err(Error::Format(format!(
            "T has {} bits but its levels end at {start}",
            tree.len()
        )));
    }
    Ok(count)
}

impl CompressedMatrix for K2Tree {
    fn k(&self) -> usize {
        self.k
    }

    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn side(&self) -> usize {
        self.side
    }

    fn region(&self, r: &Region) -> Result<BitGrid> {
        K2Tree::region(self, r)
    }

    fn total_bits(&self) -> usize {
        K2Tree::total_bits(self)
    }

    fn cell(&self, x: usize, y: usize) -> Result<bool> {
        K2Tree::cell(self, x, y)
    }
}

/// Number of `T` plus `L` bits the aligned square block `r` would take as a
/// plain k²-tree subtree, counting its own node bit.
pub fn subtree_bit_cost(m: &BitMatrix, r: &Region, k: usize) -> Result<usize> {
    let s = r.width();
    if !r.is_square() {
        return Err(Error::InvalidRegion(format!("{r} is not square")));
    }
    log_k(s, k)
        .map_err(|_| Error::InvalidRegion(format!("block side {s} is not a power of {k}")))?;
    if !r.x_min.is_multiple_of(s) || !r.y_min.is_multiple_of(s) {
        return Err(Error::InvalidRegion(format!(
            "{r} is not aligned to its grid"
        )));
    }
    r.check_within(m.side())?;
    Ok(subtree_bit_cost_capped(
        m,
        r.x_min,
        r.y_min,
        s,
        k,
        usize::MAX,
    ))
}

/// Like [`subtree_bit_cost`] but stops counting once the total exceeds `cap`;
/// any result above `cap` only means "more than `cap`".
pub(crate) fn subtree_bit_cost_capped(
    m: &BitMatrix,
    x: usize,
    y: usize,
    s: usize,
    k: usize,
    cap: usize,
) -> usize {
    fn walk(m: &BitMatrix, x: usize, y: usize, s: usize, k: usize, acc: &mut usize, cap: usize) {
        *acc += 1;
        if *acc > cap || m.is_zero_region(&Region::square(x, y, s)) {
            return;
        }
        if s == k {
            *acc += k * k;
            return;
        }
        let c = s / k;
        for i in 0..k * k {
            walk(m, x + (i % k) * c, y + (i / k) * c, c, k, acc, cap);
            if *acc > cap {
                return;
            }
        }
    }
    let mut acc = 0;
    walk(m, x, y, s, k, &mut acc, cap);
    acc
}
