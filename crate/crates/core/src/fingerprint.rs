//! Two-dimensional Karp-Rabin fingerprints of square submatrices.
//!
//! A `side x side` window is hashed as the polynomial of its cells in
//! row-major order. The grid is built in two rolling passes: vertical strips
//! of `side` cells per column (radix `base^side`), then horizontal runs of
//! `side` strip values (radix `base`). Both passes cost O(1) per position.
//!
//! Fingerprints only nominate candidates; every match is confirmed with
//! [`verify_equal`] before it is used.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{BitMatrix, Region};

/// 2⁶¹ − 1.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// Modulus and radix of a fingerprint family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KarpRabin {
    modulus: u64,
    base: u64,
}

impl KarpRabin {
    pub fn new(modulus: u64, base: u64) -> Result<Self> {
        if !(5..=MERSENNE_61).contains(&modulus) {
            return Err(Error::InvalidParameter(format!(
                "fingerprint modulus {modulus} outside [5, 2^61-1]"
            )));
        }
        if !(2..=modulus - 2).contains(&base) {
            return Err(Error::InvalidParameter(format!(
                "fingerprint base {base} outside [2, {}]",
                modulus - 2
            )));
        }
        Ok(Self { modulus, base })
    }

    /// Default modulus with a base drawn from `seed`.
    pub fn seeded(seed: u64) -> Self {
        Self::seeded_with_modulus(MERSENNE_61, seed).expect("default modulus is valid")
    }

    pub fn seeded_with_modulus(modulus: u64, seed: u64) -> Result<Self> {
        Self::new(modulus, 2)?;
        let base = ChaCha8Rng::seed_from_u64(seed).gen_range(2..=modulus - 2);
        Self::new(modulus, base)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        let p = a as u128 * b as u128;
        if self.modulus == MERSENNE_61 {
            let folded = (p as u64 & MERSENNE_61) + (p >> 61) as u64;
            if folded >= MERSENNE_61 {
                folded - MERSENNE_61
            } else {
                folded
            }
        } else {
            (p % self.modulus as u128) as u64
        }
    }

    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }
}

/// Reference fingerprint of a square region, computed without rolling.
pub fn fingerprint_direct(m: &BitMatrix, r: &Region, kr: &KarpRabin) -> Result<u64> {
    if !r.is_square() {
        return Err(Error::InvalidRegion(format!("{r} is not square")));
    }
    r.check_within(m.side())?;
    let mut h = 0;
    for y in r.y_min..=r.y_max {
        for x in r.x_min..=r.x_max {
            h = kr.add(kr.mul(h, kr.base), m.get(x, y) as u64);
        }
    }
    Ok(h)
}

/// Fingerprints of every `side x side` window of a matrix.
#[derive(Debug, Clone)]
pub struct FingerprintGrid {
    side: usize,
    n: usize,
    span: usize,
    kr: KarpRabin,
    /// `span` rows by `n` columns
    col_fp: Vec<u64>,
    /// `span` rows by `span` columns
    block_fp: Vec<u64>,
}

impl FingerprintGrid {
    pub fn build(m: &BitMatrix, side: usize, kr: &KarpRabin) -> Result<Self> {
        let n = m.side();
        if side == 0 || side > n {
            return Err(Error::InvalidRegion(format!(
                "block side {side} outside [1, {n}]"
            )));
        }
        let span = n - side + 1;

        // phase 1: vertical strips, rolled downwards
        let strip_radix = kr.pow(kr.base, side as u64);
        let strip_top = kr.pow(strip_radix, side as u64 - 1);
        let mut col_fp = vec![0u64; span * n];
        for col in 0..n {
            let mut h = 0;
            for y in 0..side {
                h = kr.add(kr.mul(h, strip_radix), m.get(col, y) as u64);
            }
            col_fp[col] = h;
            for row in 1..span {
                let out = if m.get(col, row - 1) { strip_top } else { 0 };
                h = kr.add(
                    kr.mul(kr.sub(h, out), strip_radix),
                    m.get(col, row + side - 1) as u64,
                );
                col_fp[row * n + col] = h;
            }
        }

        // phase 2: strips combined left to right
        let run_top = kr.pow(kr.base, side as u64 - 1);
        let mut block_fp = vec![0u64; span * span];
        for row in 0..span {
            let strips = &col_fp[row * n..(row + 1) * n];
            let mut h = 0;
            for &s in &strips[..side] {
                h = kr.add(kr.mul(h, kr.base), s);
            }
            block_fp[row * span] = h;
            for col in 1..span {
                h = kr.add(
                    kr.mul(kr.sub(h, kr.mul(strips[col - 1], run_top)), kr.base),
                    strips[col + side - 1],
                );
                block_fp[row * span + col] = h;
            }
        }

        Ok(Self {
            side,
            n,
            span,
            kr: *kr,
            col_fp,
            block_fp,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn karp_rabin(&self) -> &KarpRabin {
        &self.kr
    }

    /// Number of valid window origins per axis, `n - side + 1`.
    pub fn span(&self) -> usize {
        self.span
    }

    /// Fingerprint of the window whose top-left cell is `(x=col, y=row)`.
    #[inline]
    pub fn block(&self, row: usize, col: usize) -> u64 {
        self.block_fp[row * self.span + col]
    }

    /// Fingerprint of the strip `M[row..row+side][col]`.
    pub fn strip(&self, row: usize, col: usize) -> u64 {
        self.col_fp[row * self.n + col]
    }
}

/// Exact cell-by-cell comparison of two equally sized regions.
pub fn verify_equal(m: &BitMatrix, a: &Region, b: &Region) -> Result<bool> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::InvalidRegion(format!("{a} and {b} differ in size")));
    }
    a.check_within(m.side())?;
    b.check_within(m.side())?;
    if a.is_square() {
        return Ok(m.windows_equal((a.x_min, a.y_min), (b.x_min, b.y_min), a.width()));
    }
    for dy in 0..a.height() {
        for dx in 0..a.width() {
            if m.get(a.x_min + dx, a.y_min + dy) != m.get(b.x_min + dx, b.y_min + dy) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Targets sharing one exact content, identified by a witness window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentGroup {
    pub witness: (usize, usize),
    pub targets: Vec<usize>,
}

/// Pending copy targets of one level, keyed by fingerprint and split by
/// exact content.
#[derive(Debug, Clone)]
pub struct CandidateTable {
    side: usize,
    groups: HashMap<u64, Vec<ContentGroup>>,
    pending: usize,
}

impl CandidateTable {
    pub fn new(side: usize) -> Self {
        Self {
            side,
            groups: HashMap::new(),
            pending: 0,
        }
    }

    /// Registers `target`, whose window starts at `origin` and hashes to `fp`.
    pub fn insert(&mut self, m: &BitMatrix, fp: u64, origin: (usize, usize), target: usize) {
        let side = self.side;
        let bucket = self.groups.entry(fp).or_default();
        self.pending += 1;
        for g in bucket.iter_mut() {
            if m.windows_equal(g.witness, origin, side) {
                g.targets.push(target);
                return;
            }
        }
        bucket.push(ContentGroup {
            witness: origin,
            targets: vec![target],
        });
    }

    /// Index of the group whose content equals the window at `origin`.
    pub fn find(&self, m: &BitMatrix, fp: u64, origin: (usize, usize)) -> Option<usize> {
        self.groups
            .get(&fp)?
            .iter()
            .position(|g| m.windows_equal(g.witness, origin, self.side))
    }

    pub fn take(&mut self, fp: u64, index: usize) -> ContentGroup {
        let bucket = self.groups.get_mut(&fp).expect("bucket exists");
        let g = bucket.swap_remove(index);
        if bucket.is_empty() {
            self.groups.remove(&fp);
        }
        self.pending -= g.targets.len();
        g
    }

    pub fn contains_key(&self, fp: u64) -> bool {
        self.groups.contains_key(&fp)
    }

    /// Targets not yet resolved.
    pub fn pending(&self) -> usize {
        self.pending
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn groups(&self) -> impl Iterator<Item = (u64, &ContentGroup)> {
        self.groups
            .iter()
            .flat_map(|(&fp, gs)| gs.iter().map(move |g| (fp, g)))
    }
}
