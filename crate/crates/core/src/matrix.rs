//! Uncompressed binary matrices, regions, and the text/image input formats.
//!
//! Coordinates are `(x, y)` with `x` the column and `y` the row. Row `u` of an
//! adjacency matrix lists the direct neighbors of node `u`.

use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// Largest padded side accepted by the dense representation.
pub const MAX_SIDE: usize = 1 << 16;

/// Smallest power of `k` that is at least `max(rows, cols)` and at least `k`.
pub fn padded_side(rows: usize, cols: usize, k: usize) -> Result<usize> {
    check_arity(k)?;
    let need = rows.max(cols);
    let mut side = k;
    while side < need {
        side = side
            .checked_mul(k)
            .ok_or_else(|| Error::InvalidRegion(format!("dimension {need} too large")))?;
    }
    if side > MAX_SIDE {
        return Err(Error::InvalidRegion(format!(
            "padded side {side} exceeds the supported maximum {MAX_SIDE}"
        )));
    }
    Ok(side)
}

pub(crate) fn check_arity(k: usize) -> Result<()> {
    if (2..=255).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidArity(k))
    }
}

/// `log_k(side)`, or an error when `side` is not a positive power of `k`.
pub fn log_k(side: usize, k: usize) -> Result<u32> {
    check_arity(k)?;
    let mut s = side;
    let mut h = 0;
    while s > 1 && s.is_multiple_of(k) {
        s /= k;
        h += 1;
    }
    if s != 1 || h == 0 {
        return Err(Error::NotPowerOfK { side, k });
    }
    Ok(h)
}

/// Axis-aligned rectangle with inclusive corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Region {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

impl Region {
    pub fn new(x_min: usize, y_min: usize, x_max: usize, y_max: usize) -> Result<Self> {
        if x_min > x_max || y_min > y_max {
            return Err(Error::InvalidRegion(format!(
                "[({x_min},{y_min}),({x_max},{y_max})] has inverted corners"
            )));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// `side x side` square with top-left corner `(x, y)`.
    pub fn square(x: usize, y: usize, side: usize) -> Self {
        debug_assert!(side > 0);
        Self {
            x_min: x,
            y_min: y,
            x_max: x + side - 1,
            y_max: y + side - 1,
        }
    }

    pub fn cell(x: usize, y: usize) -> Self {
        Self::square(x, y, 1)
    }

    pub fn row(y: usize, side: usize) -> Self {
        Self {
            x_min: 0,
            y_min: y,
            x_max: side - 1,
            y_max: y,
        }
    }

    pub fn column(x: usize, side: usize) -> Self {
        Self {
            x_min: x,
            y_min: 0,
            x_max: x,
            y_max: side - 1,
        }
    }

    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }

    pub fn is_square(&self) -> bool {
        self.width() == self.height()
    }

    pub fn within(&self, side: usize) -> bool {
        self.x_max < side && self.y_max < side
    }

    pub fn contains(&self, other: &Region) -> bool {
        self.x_min <= other.x_min
            && self.y_min <= other.y_min
            && other.x_max <= self.x_max
            && other.y_max <= self.y_max
    }

    pub fn intersects(&self, other: &Region) -> bool {
        self.x_min <= other.x_max
            && other.x_min <= self.x_max
            && self.y_min <= other.y_max
            && other.y_min <= self.y_max
    }

    pub fn intersection(&self, other: &Region) -> Option<Region> {
        self.intersects(other).then(|| Region {
            x_min: self.x_min.max(other.x_min),
            y_min: self.y_min.max(other.y_min),
            x_max: self.x_max.min(other.x_max),
            y_max: self.y_max.min(other.y_max),
        })
    }

    pub fn translate(&self, dx: usize, dy: usize) -> Region {
        Region {
            x_min: self.x_min + dx,
            y_min: self.y_min + dy,
            x_max: self.x_max + dx,
            y_max: self.y_max + dy,
        }
    }

    /// Shifts the region towards the origin. Panics if that underflows.
    pub fn translate_back(&self, dx: usize, dy: usize) -> Region {
        Region {
            x_min: self.x_min - dx,
            y_min: self.y_min - dy,
            x_max: self.x_max - dx,
            y_max: self.y_max - dy,
        }
    }

    pub(crate) fn check_within(&self, side: usize) -> Result<()> {
        if self.within(side) {
            Ok(())
        } else {
            Err(Error::RegionOutOfBounds(format!("{self} in side {side}")))
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[({},{}),({},{})]",
            self.x_min, self.y_min, self.x_max, self.y_max
        )
    }
}

/// Parses `"x1,y1,x2,y2"`.
impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidRegion(format!(
                "expected x1,y1,x2,y2 but got {s:?}"
            )));
        }
        let mut v = [0usize; 4];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| Error::InvalidRegion(format!("bad coordinate {p:?} in {s:?}")))?;
        }
        Region::new(v[0], v[1], v[2], v[3])
    }
}

/// Dense row-major bit grid; the result type of every region query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitGrid {
    width: usize,
    height: usize,
    words: Vec<u64>,
}

impl BitGrid {
    pub fn zeroed(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            words: vec![0; (width * height).div_ceil(WORD)],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        debug_assert!(x < self.width && y < self.height);
        let i = y * self.width + x;
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize) {
        debug_assert!(x < self.width && y < self.height);
        let i = y * self.width + x;
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Linear indices (`y * width + x`) of the set cells, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + b)
            })
        })
    }

    /// Writes the grid as a binary (P4) portable bitmap.
    pub fn write_pbm_p4<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "P4\n{} {}\n", self.width, self.height)?;
        let row_bytes = self.width.div_ceil(8);
        let mut buf = vec![0u8; row_bytes];
        for y in 0..self.height {
            buf.iter_mut().for_each(|b| *b = 0);
            for x in 0..self.width {
                if self.get(x, y) {
                    buf[x / 8] |= 0x80 >> (x % 8);
                }
            }
            out.write_all(&buf)?;
        }
        Ok(())
    }

    /// Writes the grid as an ASCII (P1) portable bitmap.
    pub fn write_pbm_p1<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "P1\n{} {}\n", self.width, self.height)?;
        for y in 0..self.height {
            let line: Vec<&str> = (0..self.width)
                .map(|x| if self.get(x, y) { "1" } else { "0" })
                .collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Dense binary matrix padded with zeros to a power-of-`k` side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    side: usize,
    k: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn new(rows: usize, cols: usize, k: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyInput);
        }
        let side = padded_side(rows, cols, k)?;
        let stride = side.div_ceil(WORD);
        Ok(Self {
            rows,
            cols,
            side,
            k,
            stride,
            words: vec![0; stride * side],
        })
    }

    /// Square `side x side` matrix; `side` must already be a power of `k`.
    pub fn square(side: usize, k: usize) -> Result<Self> {
        log_k(side, k)?;
        Self::new(side, side, k)
    }

    pub fn from_cells<I: IntoIterator<Item = (usize, usize)>>(
        rows: usize,
        cols: usize,
        k: usize,
        cells: I,
    ) -> Result<Self> {
        let mut m = Self::new(rows, cols, k)?;
        for (x, y) in cells {
            if x >= cols || y >= rows {
                return Err(Error::RegionOutOfBounds(format!(
                    "cell ({x},{y}) outside {cols}x{rows}"
                )));
            }
            m.set(x, y, true);
        }
        Ok(m)
    }

    /// Builds a matrix from rows of `'0'`/`'1'` characters (whitespace ignored).
    pub fn from_rows(rows: &[&str], k: usize) -> Result<Self> {
        let parsed: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| {
                r.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| c == '1')
                    .collect()
            })
            .collect();
        let cols = parsed.iter().map(Vec::len).max().unwrap_or(0);
        let mut m = Self::new(parsed.len(), cols, k)?;
        for (y, row) in parsed.iter().enumerate() {
            for (x, &b) in row.iter().enumerate() {
                m.set(x, y, b);
            }
        }
        Ok(m)
    }

    /// Same logical content padded for a different arity.
    pub fn with_arity(&self, k: usize) -> Result<Self> {
        let mut m = Self::new(self.rows, self.cols, k)?;
        for y in 0..self.rows {
            for x in self.row_ones(y) {
                m.set(x, y, true);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        assert!(
            x < self.side && y < self.side,
            "cell ({x},{y}) outside side {}",
            self.side
        );
        (self.words[y * self.stride + x / WORD] >> (x % WORD)) & 1 == 1
    }

    /// Sets a cell inside the logical bounds. Panics on padding cells.
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        assert!(
            x < self.cols && y < self.rows,
            "cell ({x},{y}) outside logical {}x{}",
            self.cols,
            self.rows
        );
        let w = &mut self.words[y * self.stride + x / WORD];
        if value {
            *w |= 1 << (x % WORD);
        } else {
            *w &= !(1 << (x % WORD));
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Up to 64 bits of row `y` starting at column `x`, LSB = column `x`.
    #[inline]
    pub(crate) fn row_bits(&self, x: usize, y: usize, len: usize) -> u64 {
        debug_assert!((1..=WORD).contains(&len) && x + len <= self.side);
        let base = y * self.stride;
        let (w, off) = (x / WORD, x % WORD);
        let mut v = self.words[base + w] >> off;
        if off + len > WORD {
            v |= self.words[base + w + 1] << (WORD - off);
        }
        if len < WORD {
            v &= (1u64 << len) - 1;
        }
        v
    }

    /// True iff every cell of `r` is zero.
    pub fn is_zero_region(&self, r: &Region) -> bool {
        for y in r.y_min..=r.y_max {
            let mut x = r.x_min;
            while x <= r.x_max {
                let len = (r.x_max - x + 1).min(WORD);
                if self.row_bits(x, y, len) != 0 {
                    return false;
                }
                x += len;
            }
        }
        true
    }

    /// Cell-by-cell comparison of two `side x side` windows.
    pub(crate) fn windows_equal(&self, a: (usize, usize), b: (usize, usize), side: usize) -> bool {
        if a == b {
            return true;
        }
        for dy in 0..side {
            let mut dx = 0;
            while dx < side {
                let len = (side - dx).min(WORD);
                if self.row_bits(a.0 + dx, a.1 + dy, len) != self.row_bits(b.0 + dx, b.1 + dy, len)
                {
                    return false;
                }
                dx += len;
            }
        }
        true
    }

    /// Columns of the set cells in row `y`, ascending.
    pub fn row_ones(&self, y: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.words[y * self.stride..(y + 1) * self.stride];
        row.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + b)
            })
        })
    }

    /// Rows of the set cells in column `x`, ascending.
    pub fn column_ones(&self, x: usize) -> Vec<usize> {
        (0..self.side).filter(|&y| self.get(x, y)).collect()
    }

    /// Verbatim copy of the cells of `r`; the reference answer for region queries.
    pub fn extract_region(&self, r: &Region) -> Result<BitGrid> {
        r.check_within(self.side)?;
        let mut g = BitGrid::zeroed(r.width(), r.height());
        for y in r.y_min..=r.y_max {
            for x in r.x_min..=r.x_max {
                if self.get(x, y) {
                    g.set(x - r.x_min, y - r.y_min);
                }
            }
        }
        Ok(g)
    }

    /// The logical (unpadded) area as a grid.
    pub fn to_grid(&self) -> BitGrid {
        self.extract_region(&Region::new(0, 0, self.cols - 1, self.rows - 1).unwrap())
            .expect("logical area is within the padded side")
    }

    /// Writes `u v` lines, one per set cell `(x=v, y=u)`.
    pub fn write_edgelist<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# {} nodes, {} edges",
            self.rows.max(self.cols),
            self.count_ones()
        )?;
        for y in 0..self.rows {
            for x in self.row_ones(y) {
                writeln!(out, "{y} {x}")?;
            }
        }
        Ok(())
    }
}

/// Parses a whitespace-separated `u v` edge list. Lines starting with `#` or
/// `%` are comments; blank lines are skipped.
pub fn parse_edgelist<R: BufRead>(input: R, k: usize) -> Result<BitMatrix> {
    check_arity(k)?;
    let mut edges = Vec::new();
    let mut max_id = 0usize;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let lineno = i + 1;
        let mut it = t.split_whitespace();
        let mut next = |what: &str| -> Result<usize> {
            let tok = it.next().ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("missing {what} node"),
            })?;
            tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad {what} node {tok:?}"),
            })
        };
        let u = next("source")?;
        let v = next("destination")?;
        if let Some(extra) = it.next() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("unexpected token {extra:?}"),
            });
        }
        max_id = max_id.max(u).max(v);
        edges.push((v, u));
    }
    if edges.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = max_id + 1;
    BitMatrix::from_cells(n, n, k, edges)
}

fn image_err(msg: impl Into<String>) -> Error {
    Error::Image(msg.into())
}

/// Reads the next header token of a PBM stream, skipping whitespace and
/// `#` comments.
fn pbm_token(data: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && data[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(image_err("truncated header"));
    }
    std::str::from_utf8(&data[start..*pos])
        .unwrap()
        .parse()
        .map_err(|_| image_err("header value overflows"))
}

/// Parses a P1 (ASCII) or P4 (binary) portable bitmap; black pixels become 1s.
pub fn parse_pbm<R: Read>(mut input: R, k: usize) -> Result<BitMatrix> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    if data.len() < 2 || data[0] != b'P' || !matches!(data[1], b'1' | b'4') {
        return Err(image_err("bad magic, expected P1 or P4"));
    }
    let binary = data[1] == b'4';
    let mut pos = 2;
    let width = pbm_token(&data, &mut pos)?;
    let height = pbm_token(&data, &mut pos)?;
    if width == 0 || height == 0 {
        return Err(image_err("zero-sized image"));
    }
    let mut m = BitMatrix::new(height, width, k)?;
    if binary {
        if pos >= data.len() || !data[pos].is_ascii_whitespace() {
            return Err(image_err("missing separator before raster"));
        }
        pos += 1;
        let row_bytes = width.div_ceil(8);
        if data.len() - pos < row_bytes * height {
            return Err(image_err("truncated raster"));
        }
        for y in 0..height {
            let row = &data[pos + y * row_bytes..pos + (y + 1) * row_bytes];
            for x in 0..width {
                if row[x / 8] & (0x80 >> (x % 8)) != 0 {
                    m.set(x, y, true);
                }
            }
        }
    } else {
        let mut cells = data[pos..].iter().filter(|b| !b.is_ascii_whitespace());
        for y in 0..height {
            for x in 0..width {
                match cells.next() {
                    Some(b'1') => m.set(x, y, true),
                    Some(b'0') => {}
                    Some(&c) => {
                        return Err(image_err(format!("unexpected byte {c:#04x} in raster")))
                    }
                    None => return Err(image_err("truncated raster")),
                }
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, k: usize, density: f64, seed: u64) -> BitMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = BitMatrix::new(rows, cols, k).unwrap();
        for y in 0..rows {
            for x in 0..cols {
                if rng.gen_bool(density) {
                    m.set(x, y, true);
                }
            }
        }
        m
    }

    #[test]
    fn side_is_power_of_k() {
        assert_eq!(padded_side(1, 1, 2).unwrap(), 2);
        assert_eq!(padded_side(5, 3, 2).unwrap(), 8);
        assert_eq!(padded_side(16, 16, 4).unwrap(), 16);
        assert_eq!(padded_side(17, 2, 4).unwrap(), 64);
        assert_eq!(padded_side(10, 10, 3).unwrap(), 27);
        assert!(padded_side(4, 4, 1).is_err());
        assert_eq!(log_k(64, 4).unwrap(), 3);
        assert!(log_k(48, 4).is_err());
        assert!(log_k(1, 2).is_err());
    }

    #[test]
    fn two_cycle() {
        let m = parse_edgelist("0 1\n1 0".as_bytes(), 2).unwrap();
        assert_eq!((m.rows(), m.cols(), m.side()), (2, 2, 2));
        assert!(m.get(1, 0) && m.get(0, 1));
        assert_eq!(m.count_ones(), 2);
    }

    #[test]
    fn self_loop() {
        let m = parse_edgelist("0 0\n".as_bytes(), 2).unwrap();
        assert_eq!((m.rows(), m.cols(), m.side()), (1, 1, 2));
        assert!(m.get(0, 0));
        assert_eq!(m.count_ones(), 1);
    }

    #[test]
    fn edgelist_fixture() {
        let text = "# 8 nodes\n% also a comment\n0 1\n0 2\n1 3\n2 3\n3 0\n4 5\n5 6\n6 7\n7 4\n\n1 5\n2 6\n3 7\n7 7\n";
        let m = parse_edgelist(text.as_bytes(), 2).unwrap();
        assert_eq!(m.count_ones(), 13);
        assert_eq!(m.side(), 8);
        assert_eq!(m.row_ones(0).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(m.column_ones(3), vec![1, 2]);
    }

    #[test]
    fn edgelist_errors() {
        match parse_edgelist("0 1\n2 x\n".as_bytes(), 2) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_edgelist("0\n".as_bytes(), 2),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_edgelist("0 1 2\n".as_bytes(), 2),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_edgelist("# nothing\n".as_bytes(), 2),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            parse_edgelist("-1 2\n".as_bytes(), 2),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn pbm_small_images() {
        let m = parse_pbm("P1\n4 4\n0000\n0000\n0000\n0000\n".as_bytes(), 2).unwrap();
        assert_eq!(m.count_ones(), 0);
        assert_eq!(m.side(), 4);
        let m = parse_pbm("P1 # one pixel\n1 1\n1".as_bytes(), 2).unwrap();
        assert!(m.get(0, 0));
        assert_eq!(m.count_ones(), 1);
    }

    #[test]
    fn pbm_p4_row_padding_matches_p1() {
        // 10 pixels wide: each P4 row uses two bytes, the last 6 bits padding
        let m = random_matrix(3, 10, 2, 0.5, 3);
        let mut p1 = Vec::new();
        let mut p4 = Vec::new();
        m.to_grid().write_pbm_p1(&mut p1).unwrap();
        m.to_grid().write_pbm_p4(&mut p4).unwrap();
        assert_eq!(p4.len(), "P4\n10 3\n".len() + 6);
        let a = parse_pbm(&p1[..], 2).unwrap();
        let b = parse_pbm(&p4[..], 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, m);
    }

    #[test]
    fn pbm_errors() {
        assert!(matches!(
            parse_pbm("P2\n1 1\n1".as_bytes(), 2),
            Err(Error::Image(_))
        ));
        assert!(matches!(
            parse_pbm("P1\n2 2\n1 0 1".as_bytes(), 2),
            Err(Error::Image(_))
        ));
        assert!(matches!(
            parse_pbm(&b"P4\n16 2\n\xff\xff\xff"[..], 2),
            Err(Error::Image(_))
        ));
        assert!(matches!(
            parse_pbm("P1\n2".as_bytes(), 2),
            Err(Error::Image(_))
        ));
    }

    #[test]
    fn region_parsing() {
        let r: Region = "1,2,3,4".parse().unwrap();
        assert_eq!(r, Region::new(1, 2, 3, 4).unwrap());
        assert_eq!(r.to_string(), "[(1,2),(3,4)]");
        assert!("1,2,3".parse::<Region>().is_err());
        assert!("3,2,1,4".parse::<Region>().is_err());
        assert!("a,2,3,4".parse::<Region>().is_err());
    }

    #[test]
    fn extract_examples() {
        let m = random_matrix(8, 8, 2, 0.4, 9);
        let full = m.extract_region(&Region::square(0, 0, 8)).unwrap();
        assert_eq!(full, m.to_grid());
        let one = m.extract_region(&Region::cell(3, 5)).unwrap();
        assert_eq!(one.get(0, 0), m.get(3, 5));
        assert!(m.extract_region(&Region::square(4, 4, 5)).is_err());
    }

    #[test]
    fn extract_matches_cell_reads() {
        let m = random_matrix(100, 100, 2, 0.3, 21);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let side = m.side();
        for _ in 0..500 {
            let (x0, y0) = (rng.gen_range(0..side), rng.gen_range(0..side));
            let (x1, y1) = (rng.gen_range(x0..side), rng.gen_range(y0..side));
            let r = Region::new(x0, y0, x1, y1).unwrap();
            let g = m.extract_region(&r).unwrap();
            for y in y0..=y1 {
                for x in x0..=x1 {
                    assert_eq!(g.get(x - x0, y - y0), m.get(x, y));
                }
            }
        }
    }

    #[test]
    fn zero_region_and_windows() {
        let mut m = BitMatrix::square(128, 2).unwrap();
        m.set(70, 3, true);
        assert!(!m.is_zero_region(&Region::square(64, 0, 64)));
        assert!(m.is_zero_region(&Region::new(0, 0, 69, 127).unwrap()));
        assert!(m.is_zero_region(&Region::new(71, 0, 127, 127).unwrap()));
        m.set(6, 3, true);
        assert!(m.windows_equal((64, 0), (0, 0), 8));
        assert!(!m.windows_equal((65, 0), (0, 0), 8));
    }

    proptest! {
        #[test]
        fn pbm_roundtrip(rows in 1usize..40, cols in 1usize..40, seed in any::<u64>()) {
            let m = random_matrix(rows, cols, 2, 0.5, seed);
            for p4 in [false, true] {
                let mut buf = Vec::new();
                if p4 {
                    m.to_grid().write_pbm_p4(&mut buf).unwrap();
                } else {
                    m.to_grid().write_pbm_p1(&mut buf).unwrap();
                }
                prop_assert_eq!(&parse_pbm(&buf[..], 2).unwrap(), &m);
            }
        }

        #[test]
        fn padding_stays_zero(rows in 1usize..50, cols in 1usize..50, seed in any::<u64>()) {
            let m = random_matrix(rows, cols, 4, 0.7, seed);
            for y in 0..m.side() {
                for x in 0..m.side() {
                    if x >= cols || y >= rows {
                        prop_assert!(!m.get(x, y));
                    }
                }
            }
        }
    }
}
