//! Two-dimensional block tree hybridized with k²-tree empty-node pruning.
//!
//! # Layout
//!
//! Depth `d` nodes cover `side / k^d` squares; the root (depth 0) is implicit
//! and `T` starts with its k² children. A 1 in `T` is an internal node. A 0 is
//! a leaf whose kind is read from `N`, which has one bit per 0 of `T`: 0 for
//! an empty (all-zero) block, 1 for a back-reference to an earlier block of
//! the same depth. Children of the deepest stored level are cell bits in `L`.
//!
//! For a back-reference at depth `d` every quantity below uses exclusive rank:
//!
//! ```text
//! p' = rank0(T, p + 1)          // N[p' - 1] == 1 marks a back-reference
//! q  = rank1(N, p') - D[d]      // 1-based index among depth-d references
//! ptr_block = p - P_d[q - 1]
//! offsets   = (O_d[2(q - 1)], O_d[2(q - 1) + 1])
//! ```
//!
//! `D[d]` counts the back-references of all depths before `d`. The copied
//! content starts at `region(ptr_block)` shifted by the offsets and may
//! straddle up to four blocks; every block it touches is internal.
//!
//! # Queries
//!
//! Regions are tracked relative to the current node. Following a reference
//! translates the pending region by the offsets into `ptr_block`'s frame and
//! climbs to the nearest ancestor that contains it, then descends as usual.

use crate::error::{Error, Result};
use crate::fingerprint::{CandidateTable, FingerprintGrid, KarpRabin, MERSENNE_61};
use crate::k2tree::subtree_bit_cost_capped;
use crate::matrix::{log_k, BitGrid, BitMatrix, Region};
use crate::query::CompressedMatrix;
use crate::succinct::{bits_for, BitVecBuilder, BitVector, PackedIntArray};

/// Construction knobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildParams {
    /// Fingerprint modulus; collisions only cost time.
    pub modulus: u64,
    /// Seed for the fingerprint base.
    pub seed: u64,
    /// Keep blocks whose plain k²-tree subtree is no larger than a
    /// back-reference as internal nodes.
    pub cost_filter: bool,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self {
            modulus: MERSENNE_61,
            seed: 0,
            cost_filter: true,
        }
    }
}

impl BuildParams {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Internal,
    EmptyLeaf,
    BackRefLeaf,
    /// A cell bit stored in `L`.
    CellLevel,
}

/// A decoded back-reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopyLink {
    pub target: usize,
    pub ptr_block: usize,
    pub offset_x: usize,
    pub offset_y: usize,
}

/// A back-reference as recorded by the builder, with absolute coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TracedLink {
    pub depth: u32,
    pub link: CopyLink,
    pub target_origin: (usize, usize),
    pub source_origin: (usize, usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LevelStats {
    pub depth: u32,
    pub block_side: usize,
    pub nodes: usize,
    pub internal: usize,
    pub empty: usize,
    pub back_refs: usize,
    /// Nonzero blocks kept internal because a reference would not be smaller.
    pub kept_by_cost: usize,
}

/// Bookkeeping kept by the builder; used by tests and reports.
#[derive(Debug, Clone, Default)]
pub struct BuildTrace {
    pub links: Vec<TracedLink>,
    pub levels: Vec<LevelStats>,
}

/// Back-references of one depth: backward distances and interleaved offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointerLevel {
    pub distances: PackedIntArray,
    pub offsets: PackedIntArray,
}

impl PointerLevel {
    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }
}

/// Exact payload sizes in bits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SizeBreakdown {
    pub t: usize,
    pub l: usize,
    pub n: usize,
    pub p: usize,
    pub o: usize,
    pub d: usize,
}

impl SizeBreakdown {
    pub fn total(&self) -> usize {
        self.t + self.l + self.n + self.p + self.o + self.d
    }
}

/// Counters filled by instrumented queries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// Back-references followed.
    pub hops: u64,
    /// Sum of levels climbed while resolving those references.
    pub upwalk_levels: u64,
}

impl QueryStats {
    pub fn mean_upwalk(&self) -> f64 {
        if self.hops == 0 {
            0.0
        } else {
            self.upwalk_levels as f64 / self.hops as f64
        }
    }

    pub fn merge(&mut self, other: &QueryStats) {
        self.hops += other.hops;
        self.upwalk_levels += other.upwalk_levels;
    }
}

/// Where a translated region lands after climbing from a pointed block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Upwalk {
    /// Position of the containing ancestor, `None` for the root.
    pub pos: Option<usize>,
    pub depth: u32,
    /// The translated region, relative to the ancestor.
    pub region: Region,
    /// Total shift applied to the pending region.
    pub shift: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoDBlockTree {
    k: usize,
    rows: usize,
    cols: usize,
    side: usize,
    height: u32,
    tree: BitVector,
    leaves: BitVector,
    kinds: BitVector,
    /// Entry `d - 1` holds depth `d`, for `1 <= d < height`.
    levels: Vec<PointerLevel>,
    /// `D[d]` for `0 <= d <= height`.
    acc: Vec<usize>,
    /// First `T:L` position of depth `d`, for `1 <= d <= height`; entry 0 is 0.
    level_start: Vec<usize>,
    /// Block side per depth.
    sides: Vec<usize>,
    kr: KarpRabin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Empty,
    Candidate,
    Internal,
    Leaf { source: (usize, usize), ptr: usize },
}

const NO_NODE: u32 = u32::MAX;

fn offset_width(block_side: usize) -> u32 {
    bits_for(block_side as u64 - 1)
}

impl TwoDBlockTree {
    pub fn build(m: &BitMatrix, params: &BuildParams) -> Result<Self> {
        Ok(Self::build_traced(m, params)?.0)
    }

    /// Builds the tree and returns the builder's record of every link.
    pub fn build_traced(m: &BitMatrix, params: &BuildParams) -> Result<(Self, BuildTrace)> {
        let k = m.k();
        let kk = k * k;
        let n = m.side();
        let height = log_k(n, k)?;
        let kr = KarpRabin::seeded_with_modulus(params.modulus, params.seed)?;
        let sides: Vec<usize> = (0..=height).map(|d| n / k.pow(d)).collect();

        let mut tree = BitVecBuilder::new();
        let mut kinds = BitVecBuilder::new();
        let mut leaves = BitVecBuilder::new();
        let mut levels = Vec::new();
        let mut level_start = vec![0usize; height as usize + 1];
        let mut trace = BuildTrace::default();
        let mut parents = vec![(0usize, 0usize)];

        for depth in 1..=height {
            let s = sides[depth as usize];
            let nodes: Vec<(usize, usize)> = parents
                .iter()
                .flat_map(|&(px, py)| (0..kk).map(move |i| (px + (i % k) * s, py + (i / k) * s)))
                .collect();
            level_start[depth as usize] = tree.len();
            if depth == height {
                for &(x, y) in &nodes {
                    leaves.push(m.get(x, y));
                }
                break;
            }

            let (slots, stats) = classify_level(m, &kr, depth, s, &nodes, params.cost_filter)?;
            let base = tree.len();
            let mut distances = Vec::new();
            let mut offsets = Vec::new();
            parents.clear();
            for (i, (&slot, &(x, y))) in slots.iter().zip(&nodes).enumerate() {
                match slot {
                    Slot::Internal => {
                        tree.push(true);
                        parents.push((x, y));
                    }
                    Slot::Empty => {
                        tree.push(false);
                        kinds.push(false);
                    }
                    Slot::Leaf { source, ptr } => {
                        tree.push(false);
                        kinds.push(true);
                        let (ox, oy) = (source.0 - nodes[ptr].0, source.1 - nodes[ptr].1);
                        distances.push((i - ptr) as u64);
                        offsets.push(ox as u64);
                        offsets.push(oy as u64);
                        trace.links.push(TracedLink {
                            depth,
                            link: CopyLink {
                                target: base + i,
                                ptr_block: base + ptr,
                                offset_x: ox,
                                offset_y: oy,
                            },
                            target_origin: (x, y),
                            source_origin: source,
                        });
                    }
                    Slot::Candidate => unreachable!("every candidate is resolved during the scan"),
                }
            }
            levels.push(PointerLevel {
                distances: PackedIntArray::from_values(&distances),
                offsets: PackedIntArray::with_width(offset_width(s), &offsets)?,
            });
            trace.levels.push(stats);
        }

        let t = Self::from_parts(
            k,
            m.rows(),
            m.cols(),
            n,
            tree.build(),
            leaves.build(),
            kinds.build(),
            levels,
            kr,
        )?;
        debug_assert_eq!(t.level_start, level_start);
        Ok((t, trace))
    }

    /// Reassembles a tree from its stored components, validating their shape.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        k: usize,
        rows: usize,
        cols: usize,
        side: usize,
        tree: BitVector,
        leaves: BitVector,
        kinds: BitVector,
        levels: Vec<PointerLevel>,
        kr: KarpRabin,
    ) -> Result<Self> {
        let height = log_k(side, k)?;
        let kk = k * k;
        if rows == 0 || cols == 0 || rows > side || cols > side {
            return Err(Error::Format(format!(
                "logical size {rows}x{cols} does not fit side {side}"
            )));
        }
        if kinds.len() != tree.count_zeros() {
            return Err(Error::Format(format!(
                "N has {} bits but T has {} zeros",
                kinds.len(),
                tree.count_zeros()
            )));
        }
        if levels.len() != height as usize - 1 {
            return Err(Error::Format(format!(
                "expected {} pointer levels, got {}",
                height - 1,
                levels.len()
            )));
        }
        let sides: Vec<usize> = (0..=height).map(|d| side / k.pow(d)).collect();
        let mut level_start = vec![0usize; height as usize + 1];
        let mut acc = vec![0usize; height as usize + 1];
        let mut start = 0;
        let mut count = kk;
        for depth in 1..height {
            let end = start + count;
            if end > tree.len() {
                return Err(Error::Format(format!(
                    "T ends at {} inside depth {depth} spanning [{start}, {end})",
                    tree.len()
                )));
            }
            level_start[depth as usize] = start;
            let refs = kinds.rank1(tree.rank0(end)) - kinds.rank1(tree.rank0(start));
            let level = &levels[depth as usize - 1];
            if level.distances.len() != refs || level.offsets.len() != 2 * refs {
                return Err(Error::Format(format!(
                    "depth {depth} has {refs} references but stores {} distances and {} offsets",
                    level.distances.len(),
                    level.offsets.len()
                )));
            }
            if level.offsets.width() != offset_width(sides[depth as usize]) {
                return Err(Error::Format(format!(
                    "depth {depth} offsets are {} bits wide, expected {}",
                    level.offsets.width(),
                    offset_width(sides[depth as usize])
                )));
            }
            acc[depth as usize + 1] = acc[depth as usize] + refs;
            count = (tree.rank1(end) - tree.rank1(start)) * kk;
            start = end;
        }
        if start != tree.len() {
            return Err(Error::Format(format!(
                "T has {} bits but its levels end at {start}",
                tree.len()
            )));
        }
        level_start[height as usize] = start;
        if leaves.len() != count {
            return Err(Error::Format(format!(
                "L has {} bits, the tree shape needs {count}",
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
            kinds,
            levels,
            acc,
            level_start,
            sides,
            kr,
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

    /// The `N` bitvector.
    pub fn kinds(&self) -> &BitVector {
        &self.kinds
    }

    /// Pointer arrays of depth `d` (`1 <= d < height`).
    pub fn level(&self, depth: u32) -> Option<&PointerLevel> {
        (depth >= 1)
            .then(|| self.levels.get(depth as usize - 1))
            .flatten()
    }

    pub fn levels(&self) -> &[PointerLevel] {
        &self.levels
    }

    /// `D`: references in all depths before `d`, for `0 <= d <= height`.
    pub fn level_accumulator(&self) -> &[usize] {
        &self.acc
    }

    pub fn karp_rabin(&self) -> &KarpRabin {
        &self.kr
    }

    pub fn block_side(&self, depth: u32) -> usize {
        self.sides[depth as usize]
    }

    pub fn back_ref_count(&self) -> usize {
        self.acc[self.height as usize]
    }

    /// Positions of depth `d` in `T:L`.
    pub fn level_range(&self, depth: u32) -> std::ops::Range<usize> {
        assert!(depth >= 1 && depth <= self.height);
        let start = self.level_start[depth as usize];
        let end = if depth == self.height {
            self.tree.len() + self.leaves.len()
        } else {
            self.level_start[depth as usize + 1]
        };
        start..end
    }

    /// Depth of a `T:L` position.
    pub fn depth_of(&self, pos: usize) -> Result<u32> {
        let total = self.tree.len() + self.leaves.len();
        if pos >= total {
            return Err(Error::OutOfBounds {
                index: pos,
                len: total,
            });
        }
        let d = self.level_start[1..].partition_point(|&s| s <= pos);
        Ok(d as u32)
    }

    pub fn classify(&self, pos: usize) -> Result<NodeClass> {
        let depth = self.depth_of(pos)?;
        Ok(if depth == self.height {
            NodeClass::CellLevel
        } else if self.tree.get(pos) {
            NodeClass::Internal
        } else if self.kinds.get(self.tree.rank0(pos + 1) - 1) {
            NodeClass::BackRefLeaf
        } else {
            NodeClass::EmptyLeaf
        })
    }

    #[inline]
    fn children_start(&self, pos: usize, depth: u32) -> usize {
        if depth == 0 {
            0
        } else {
            self.tree.rank1(pos + 1) * self.k * self.k
        }
    }

    #[inline]
    fn is_back_ref(&self, pos: usize) -> bool {
        self.kinds.get(self.tree.rank0(pos + 1) - 1)
    }

    /// Decodes the back-reference stored at `pos`, which must lie at depth `d`.
    pub fn decode_link(&self, pos: usize, depth: u32) -> Result<CopyLink> {
        let not_ref = || Error::NotBackReference { pos, depth };
        if depth == 0 || depth >= self.height || !self.level_range(depth).contains(&pos) {
            return Err(not_ref());
        }
        if self.tree.get(pos) || !self.is_back_ref(pos) {
            return Err(not_ref());
        }
        Ok(self.decode_unchecked(pos, depth))
    }

    #[inline]
    fn decode_unchecked(&self, pos: usize, depth: u32) -> CopyLink {
        let zeros = self.tree.rank0(pos + 1);
        let q = self.kinds.rank1(zeros) - self.acc[depth as usize];
        let level = &self.levels[depth as usize - 1];
        let dist = level
            .distances
            .get(q - 1)
            .expect("reference index in range") as usize;
        CopyLink {
            target: pos,
            ptr_block: pos - dist,
            offset_x: level.offsets.get(2 * (q - 1)).unwrap() as usize,
            offset_y: level.offsets.get(2 * (q - 1) + 1).unwrap() as usize,
        }
    }

    /// Parent position of a node at `depth >= 2`.
    fn parent_of(&self, pos: usize) -> usize {
        let kk = self.k * self.k;
        self.tree
            .select1(pos / kk)
            .expect("non-root-child has a parent")
    }

    /// Climbs from `ptr_block` at `depth` until the pending region, shifted
    /// by the offsets, fits inside the current node.
    pub fn back(
        &self,
        ptr_block: usize,
        offset_x: usize,
        offset_y: usize,
        depth: u32,
        pending: &Region,
    ) -> Result<Upwalk> {
        if depth == 0 || depth >= self.height || !self.level_range(depth).contains(&ptr_block) {
            return Err(Error::NotInternal(ptr_block));
        }
        if !self.tree.get(ptr_block) {
            return Err(Error::NotInternal(ptr_block));
        }
        let s = self.sides[depth as usize];
        if offset_x >= s || offset_y >= s || !pending.within(s) {
            return Err(Error::InvalidRegion(format!(
                "pending {pending} with offsets ({offset_x},{offset_y}) at block side {s}"
            )));
        }
        Ok(self.back_unchecked(ptr_block, offset_x, offset_y, depth, pending))
    }

    #[inline]
    fn back_unchecked(
        &self,
        ptr_block: usize,
        offset_x: usize,
        offset_y: usize,
        depth: u32,
        pending: &Region,
    ) -> Upwalk {
        let k = self.k;
        let kk = k * k;
        let mut region = pending.translate(offset_x, offset_y);
        let (mut sx, mut sy) = (offset_x, offset_y);
        let mut pos = ptr_block;
        let mut d = depth;
        while d > 0 && !region.within(self.sides[d as usize]) {
            let i = pos % kk;
            let s = self.sides[d as usize];
            let (dx, dy) = ((i % k) * s, (i / k) * s);
            region = region.translate(dx, dy);
            sx += dx;
            sy += dy;
            pos = if d >= 2 { self.parent_of(pos) } else { 0 };
            d -= 1;
        }
        Upwalk {
            pos: (d > 0).then_some(pos),
            depth: d,
            region,
            shift: (sx, sy),
        }
    }

    /// Extracts the cells of `r`.
    pub fn access(&self, r: &Region) -> Result<BitGrid> {
        let mut stats = QueryStats::default();
        self.access_with_stats(r, &mut stats)
    }

    /// Extracts the cells of `r`, counting followed references and climbs.
    pub fn access_with_stats(&self, r: &Region, stats: &mut QueryStats) -> Result<BitGrid> {
        r.check_within(self.side)?;
        let mut out = BitGrid::zeroed(r.width(), r.height());
        self.access_into(r, &mut out, stats);
        Ok(out)
    }

    fn access_into(&self, r: &Region, out: &mut BitGrid, stats: &mut QueryStats) {
        struct Frame {
            pos: usize,
            depth: u32,
            /// relative to the node
            rect: Region,
            /// result coordinates of the node's origin
            out_x: isize,
            out_y: isize,
            hops: u32,
        }
        let k = self.k;
        let kk = k * k;
        let t_len = self.tree.len();
        let mut stack = vec![Frame {
            pos: 0,
            depth: 0,
            rect: *r,
            out_x: -(r.x_min as isize),
            out_y: -(r.y_min as isize),
            hops: 0,
        }];
        while let Some(f) = stack.pop() {
            if f.depth == self.height {
                if self.leaves.get(f.pos - t_len) {
                    out.set(f.out_x as usize, f.out_y as usize);
                }
                continue;
            }
            if f.depth == 0 || self.tree.get(f.pos) {
                let start = self.children_start(f.pos, f.depth);
                let s = self.sides[f.depth as usize + 1];
                for i in (0..kk).rev() {
                    let (cx, cy) = ((i % k) * s, (i / k) * s);
                    if let Some(q) = f.rect.intersection(&Region::square(cx, cy, s)) {
                        stack.push(Frame {
                            pos: start + i,
                            depth: f.depth + 1,
                            rect: q.translate_back(cx, cy),
                            out_x: f.out_x + cx as isize,
                            out_y: f.out_y + cy as isize,
                            hops: f.hops,
                        });
                    }
                }
            } else if self.is_back_ref(f.pos) {
                let link = self.decode_unchecked(f.pos, f.depth);
                let up = self.back_unchecked(
                    link.ptr_block,
                    link.offset_x,
                    link.offset_y,
                    f.depth,
                    &f.rect,
                );
                stats.hops += 1;
                stats.upwalk_levels += (f.depth - up.depth) as u64;
                // each followed reference lands in a region free of leaves at
                // its own depth, so a chain only ever moves deeper
                debug_assert!(f.hops < self.height, "reference chain too long");
                stack.push(Frame {
                    pos: up.pos.unwrap_or(0),
                    depth: up.depth,
                    rect: up.region,
                    out_x: f.out_x - up.shift.0 as isize,
                    out_y: f.out_y - up.shift.1 as isize,
                    hops: f.hops + 1,
                });
            }
        }
    }

    /// Single-cell lookup without a work stack.
    pub fn cell(&self, x: usize, y: usize) -> Result<bool> {
        Region::cell(x, y).check_within(self.side)?;
        let k = self.k;
        let (mut x, mut y) = (x, y);
        let mut pos = 0;
        let mut depth = 0;
        loop {
            if depth == self.height {
                return Ok(self.leaves.get(pos - self.tree.len()));
            }
            if depth == 0 || self.tree.get(pos) {
                let s = self.sides[depth as usize + 1];
                pos = self.children_start(pos, depth) + (y / s) * k + x / s;
                x %= s;
                y %= s;
                depth += 1;
            } else if self.is_back_ref(pos) {
                let link = self.decode_unchecked(pos, depth);
                let up = self.back_unchecked(
                    link.ptr_block,
                    link.offset_x,
                    link.offset_y,
                    depth,
                    &Region::cell(x, y),
                );
                pos = up.pos.unwrap_or(0);
                depth = up.depth;
                x = up.region.x_min;
                y = up.region.y_min;
            } else {
                return Ok(false);
            }
        }
    }

    /// Absolute region covered by the node at `pos`.
    pub fn node_region(&self, pos: usize) -> Result<Region> {
        let depth = self.depth_of(pos)?;
        let k = self.k;
        let kk = k * k;
        let (mut x, mut y) = (0, 0);
        let mut p = pos;
        let mut d = depth;
        while d > 0 {
            let i = p % kk;
            let s = self.sides[d as usize];
            x += (i % k) * s;
            y += (i / k) * s;
            if d >= 2 {
                p = self.parent_of(p);
            }
            d -= 1;
        }
        Ok(Region::square(x, y, self.sides[depth as usize]))
    }

    pub fn size_breakdown(&self) -> SizeBreakdown {
        SizeBreakdown {
            t: self.tree.len(),
            l: self.leaves.len(),
            n: self.kinds.len(),
            p: self.levels.iter().map(|l| l.distances.payload_bits()).sum(),
            o: self.levels.iter().map(|l| l.offsets.payload_bits()).sum(),
            d: self.accumulator_array().payload_bits(),
        }
    }

    /// `D` packed as stored in containers.
    pub fn accumulator_array(&self) -> PackedIntArray {
        let values: Vec<u64> = self.acc.iter().map(|&v| v as u64).collect();
        PackedIntArray::from_values(&values)
    }

    pub fn total_bits(&self) -> usize {
        self.size_breakdown().total()
    }

    /// Absolute origins of every node of every stored depth, by position.
    fn node_origins(&self) -> Vec<(usize, usize)> {
        let k = self.k;
        let kk = k * k;
        let mut origins = Vec::with_capacity(self.tree.len() + self.leaves.len());
        let mut parents = vec![(0usize, 0usize)];
        for depth in 1..=self.height {
            let s = self.sides[depth as usize];
            let start = origins.len();
            for &(px, py) in &parents {
                for i in 0..kk {
                    origins.push((px + (i % k) * s, py + (i / k) * s));
                }
            }
            if depth < self.height {
                parents = (start..origins.len())
                    .filter(|&p| self.tree.get(p))
                    .map(|p| origins[p])
                    .collect();
            }
        }
        origins
    }

    /// Checks the structural invariants against the source matrix and
    /// returns every violation found.
    pub fn audit(&self, m: &BitMatrix) -> AuditReport {
        let mut report = AuditReport::default();
        let mut fail = |msg: String| report.violations.push(msg);
        if self.kinds.len() != self.tree.count_zeros() {
            fail(format!(
                "|N| = {} but T has {} zeros",
                self.kinds.len(),
                self.tree.count_zeros()
            ));
        }
        if self.acc[0] != 0 {
            fail(format!("D[0] = {}", self.acc[0]));
        }
        if self.side != m.side() || self.k != m.k() {
            fail("structure and matrix disagree on side or arity".into());
            return report;
        }
        let origins = self.node_origins();
        let mut links = 0;
        for depth in 1..self.height {
            let range = self.level_range(depth);
            let s = self.sides[depth as usize];
            let grid = self.side / s;
            let mut at = vec![usize::MAX; grid * grid];
            for p in range.clone() {
                let (x, y) = origins[p];
                at[(y / s) * grid + x / s] = p;
            }
            let mut refs = 0;
            for p in range.clone() {
                if self.tree.get(p) || !self.is_back_ref(p) {
                    continue;
                }
                refs += 1;
                links += 1;
                let link = self.decode_unchecked(p, depth);
                if !(range.start..p).contains(&link.ptr_block) {
                    fail(format!(
                        "depth {depth}: ptr {} of {p} is not earlier in the level",
                        link.ptr_block
                    ));
                    continue;
                }
                if !self.tree.get(link.ptr_block) {
                    fail(format!(
                        "depth {depth}: ptr {} of {p} is not internal",
                        link.ptr_block
                    ));
                }
                if link.offset_x >= s || link.offset_y >= s {
                    fail(format!(
                        "depth {depth}: offsets of {p} exceed block side {s}"
                    ));
                    continue;
                }
                let (px, py) = origins[link.ptr_block];
                let source = Region::square(px + link.offset_x, py + link.offset_y, s);
                if !source.within(self.side) {
                    fail(format!(
                        "depth {depth}: source {source} of {p} leaves the matrix"
                    ));
                    continue;
                }
                for by in source.y_min / s..=source.y_max / s {
                    for bx in source.x_min / s..=source.x_max / s {
                        let q = at[by * grid + bx];
                        if q == usize::MAX {
                            fail(format!(
                                "depth {depth}: source {source} of {p} covers a missing block"
                            ));
                        } else if !self.tree.get(q) {
                            fail(format!(
                                "depth {depth}: source {source} of {p} overlaps leaf {q}"
                            ));
                        }
                    }
                }
                let (tx, ty) = origins[p];
                let target = Region::square(tx, ty, s);
                let want = m.extract_region(&target).expect("target within matrix");
                match self.access(&source) {
                    Ok(got) if got == want => {}
                    _ => fail(format!(
                        "depth {depth}: source {source} of {p} differs from target {target}"
                    )),
                }
            }
            if self.acc[depth as usize + 1] - self.acc[depth as usize] != refs {
                fail(format!(
                    "depth {depth}: D step does not match {refs} references"
                ));
            }
            let level = &self.levels[depth as usize - 1];
            if level.offsets.width() != offset_width(s) {
                fail(format!(
                    "depth {depth}: offset width {}",
                    level.offsets.width()
                ));
            }
        }
        report.links_checked = links;
        report
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub links_checked: usize,
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Decides the kind of every node of one depth.
fn classify_level(
    m: &BitMatrix,
    kr: &KarpRabin,
    depth: u32,
    s: usize,
    nodes: &[(usize, usize)],
    cost_filter: bool,
) -> Result<(Vec<Slot>, LevelStats)> {
    let k = m.k();
    let n = m.side();
    let grid = n / s;
    let mut at = vec![NO_NODE; grid * grid];
    for (i, &(x, y)) in nodes.iter().enumerate() {
        at[(y / s) * grid + x / s] = i as u32;
    }

    // a reference leaf costs its T and N bits, a distance bounded by the
    // level span, and two offsets; the subtree cost also counts the T bit
    let pointer_bits = 2 + bits_for(nodes.len() as u64) as usize + 2 * offset_width(s) as usize;
    let mut stats = LevelStats {
        depth,
        block_side: s,
        nodes: nodes.len(),
        ..LevelStats::default()
    };
    let mut slots = Vec::with_capacity(nodes.len());
    for &(x, y) in nodes {
        let slot = if m.is_zero_region(&Region::square(x, y, s)) {
            Slot::Empty
        } else if cost_filter
            && subtree_bit_cost_capped(m, x, y, s, k, pointer_bits) <= pointer_bits
        {
            stats.kept_by_cost += 1;
            Slot::Internal
        } else {
            Slot::Candidate
        };
        slots.push(slot);
    }

    if slots.contains(&Slot::Candidate) {
        let fps = FingerprintGrid::build(m, s, kr)?;
        let mut table = CandidateTable::new(s);
        for (i, &(x, y)) in nodes.iter().enumerate() {
            if slots[i] == Slot::Candidate {
                table.insert(m, fps.block(y, x), (x, y), i);
            }
        }
        let span = fps.span();
        'scan: for row in 0..span {
            for col in 0..span {
                if table.is_empty() {
                    break 'scan;
                }
                let fp = fps.block(row, col);
                if !table.contains_key(fp) {
                    continue;
                }
                // the source may only touch existing, non-leaf blocks
                let (bx0, by0) = (col / s, row / s);
                let (bx1, by1) = (col.div_ceil(s), row.div_ceil(s));
                let mut covered = [0usize; 4];
                let mut ncov = 0;
                let mut valid = true;
                for by in by0..=by1 {
                    for bx in bx0..=bx1 {
                        let q = at[by * grid + bx];
                        if q == NO_NODE
                            || matches!(slots[q as usize], Slot::Empty | Slot::Leaf { .. })
                        {
                            valid = false;
                        } else {
                            covered[ncov] = q as usize;
                            ncov += 1;
                        }
                    }
                }
                if !valid {
                    continue;
                }
                let Some(gi) = table.find(m, fp, (col, row)) else {
                    continue;
                };
                let group = table.take(fp, gi);
                let source = Region::square(col, row, s);
                let ptr = covered[0];
                let mut linked = false;
                let mut waiting = Vec::new();
                for t in group.targets {
                    match slots[t] {
                        Slot::Candidate => {}
                        // already pinned as part of an earlier source
                        _ => continue,
                    }
                    let (tx, ty) = nodes[t];
                    if Region::square(tx, ty, s).intersects(&source) {
                        slots[t] = Slot::Internal;
                    } else if ptr < t {
                        slots[t] = Slot::Leaf {
                            source: (col, row),
                            ptr,
                        };
                        linked = true;
                    } else {
                        // references point backwards in T; wait for an
                        // occurrence whose top-left block precedes the target
                        waiting.push(t);
                    }
                }
                if linked {
                    for &q in &covered[..ncov] {
                        slots[q] = Slot::Internal;
                    }
                }
                for t in waiting {
                    table.insert(m, fp, nodes[t], t);
                }
            }
        }
        debug_assert!(table.is_empty(), "candidates left after the scan");
        for slot in slots.iter_mut() {
            if *slot == Slot::Candidate {
                *slot = Slot::Internal;
            }
        }
    }

    for slot in &slots {
        match slot {
            Slot::Internal => stats.internal += 1,
            Slot::Empty => stats.empty += 1,
            Slot::Leaf { .. } => stats.back_refs += 1,
            Slot::Candidate => unreachable!(),
        }
    }
    Ok((slots, stats))
}

impl CompressedMatrix for TwoDBlockTree {
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
        self.access(r)
    }

    fn total_bits(&self) -> usize {
        TwoDBlockTree::total_bits(self)
    }

    fn cell(&self, x: usize, y: usize) -> Result<bool> {
        TwoDBlockTree::cell(self, x, y)
    }
}
