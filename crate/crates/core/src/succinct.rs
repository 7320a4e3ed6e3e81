//! Bit-level primitives: a plain bitvector with rank/select support and
//! fixed-width packed integer arrays.
//!
//! Rank is exclusive throughout the crate: `rank1(p)` counts the ones in
//! positions `[0, p)`. Select is 1-based: `select1(j)` is the position of the
//! `j`-th one. Bits are stored least-significant-bit first inside 64-bit words.

use crate::error::{Error, Result};

const WORD: usize = 64;
const WORDS_PER_SUPER: usize = 8;
const SUPER: usize = WORD * WORDS_PER_SUPER;

/// Number of bits needed to write `value`, never less than one.
pub fn bits_for(value: u64) -> u32 {
    (64 - value.leading_zeros()).max(1)
}

/// Position of the `r`-th (1-based) set bit of `word`.
#[inline]
fn select_in_word(mut word: u64, r: usize) -> usize {
    debug_assert!(r >= 1 && r as u32 <= word.count_ones());
    for _ in 1..r {
        word &= word - 1;
    }
    word.trailing_zeros() as usize
}

/// Growable bit sequence used to assemble a [`BitVector`].
#[derive(Debug, Clone, Default)]
pub struct BitVecBuilder {
    words: Vec<u64>,
    len: usize,
}

impl BitVecBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(WORD)),
            len: 0,
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / WORD] |= 1 << (self.len % WORD);
        }
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn build(self) -> BitVector {
        BitVector::from_raw(self.words, self.len)
    }
}

/// Immutable bitvector with a two-level rank directory.
///
/// Superblocks of 512 bits store absolute counts; each 64-bit word stores the
/// count relative to its superblock. Select binary-searches the superblocks
/// and finishes with a word scan.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
    supers: Vec<u64>,
    blocks: Vec<u16>,
    ones: usize,
}

impl BitVector {
    fn from_raw(mut words: Vec<u64>, len: usize) -> Self {
        words.truncate(len.div_ceil(WORD));
        words.resize(len.div_ceil(WORD), 0);
        if !len.is_multiple_of(WORD) {
            let last = words.len() - 1;
            words[last] &= (1u64 << (len % WORD)) - 1;
        }
        let n = words.len();
        let mut supers = Vec::with_capacity(n / WORDS_PER_SUPER + 1);
        let mut blocks = Vec::with_capacity(n + 1);
        let mut total = 0u64;
        let mut in_super = 0u64;
        for w in 0..=n {
            if w % WORDS_PER_SUPER == 0 {
                supers.push(total);
                in_super = 0;
            }
            blocks.push(in_super as u16);
            if let Some(word) = words.get(w) {
                let c = word.count_ones() as u64;
                total += c;
                in_super += c;
            }
        }
        Self {
            words,
            len,
            supers,
            blocks,
            ones: total as usize,
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut b = BitVecBuilder::new();
        for bit in bits {
            b.push(bit);
        }
        b.build()
    }

    /// Parses a string of `'0'`/`'1'` characters, ignoring whitespace.
    pub fn from_str_bits(s: &str) -> Self {
        Self::from_bits(s.chars().filter(|c| !c.is_whitespace()).map(|c| c == '1'))
    }

    /// Rebuilds a bitvector from serialized words. Bits past `len` are cleared.
    pub fn from_words(words: Vec<u64>, len: usize) -> Result<Self> {
        if words.len() != len.div_ceil(WORD) {
            return Err(Error::Format(format!(
                "bitvector of {len} bits needs {} words, got {}",
                len.div_ceil(WORD),
                words.len()
            )));
        }
        Ok(Self::from_raw(words, len))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.ones
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of bounds ({})", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    #[inline]
    fn ones_before_word(&self, w: usize) -> usize {
        (self.supers[w / WORDS_PER_SUPER] + self.blocks[w] as u64) as usize
    }

    /// Ones in `[0, p)`. Panics if `p > len`.
    #[inline]
    pub fn rank1(&self, p: usize) -> usize {
        assert!(
            p <= self.len,
            "rank position {p} out of bounds ({})",
            self.len
        );
        let w = p / WORD;
        let r = p % WORD;
        let mut count = self.ones_before_word(w);
        if r != 0 {
            count += (self.words[w] & ((1u64 << r) - 1)).count_ones() as usize;
        }
        count
    }

    /// Zeros in `[0, p)`. Panics if `p > len`.
    #[inline]
    pub fn rank0(&self, p: usize) -> usize {
        p - self.rank1(p)
    }

    /// Checked rank of either bit value.
    pub fn rank(&self, bit: bool, p: usize) -> Result<usize> {
        if p > self.len {
            return Err(Error::OutOfBounds {
                index: p,
                len: self.len,
            });
        }
        Ok(if bit { self.rank1(p) } else { self.rank0(p) })
    }

    /// Position of the `j`-th one (1-based).
    pub fn select1(&self, j: usize) -> Option<usize> {
        if j == 0 || j > self.ones {
            return None;
        }
        // last superblock whose prefix count is below j
        let s = self.supers.partition_point(|&c| (c as usize) < j) - 1;
        let mut w = s * WORDS_PER_SUPER;
        let last = ((s + 1) * WORDS_PER_SUPER).min(self.words.len());
        while w + 1 < last && self.ones_before_word(w + 1) < j {
            w += 1;
        }
        let r = j - self.ones_before_word(w);
        Some(w * WORD + select_in_word(self.words[w], r))
    }

    /// Position of the `j`-th zero (1-based).
    pub fn select0(&self, j: usize) -> Option<usize> {
        if j == 0 || j > self.count_zeros() {
            return None;
        }
        let zeros_before_super = |s: usize| s * SUPER - self.supers[s] as usize;
        let mut lo = 0;
        let mut hi = self.supers.len();
        // last superblock s with zeros_before_super(s) < j
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if mid * WORDS_PER_SUPER <= self.words.len() && zeros_before_super(mid) < j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let zeros_before_word = |w: usize| w * WORD - self.ones_before_word(w);
        let mut w = lo * WORDS_PER_SUPER;
        let last = ((lo + 1) * WORDS_PER_SUPER).min(self.words.len());
        while w + 1 < last && zeros_before_word(w + 1) < j {
            w += 1;
        }
        let r = j - zeros_before_word(w);
        Some(w * WORD + select_in_word(!self.words[w], r))
    }

    /// Checked select of either bit value.
    pub fn select(&self, bit: bool, j: usize) -> Result<usize> {
        let found = if bit {
            self.select1(j)
        } else {
            self.select0(j)
        };
        found.ok_or(Error::NotFound {
            bit: bit as u8,
            ordinal: j,
            available: if bit { self.ones } else { self.count_zeros() },
        })
    }
}

/// Fixed-width unsigned integers packed back to back into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedIntArray {
    width: u32,
    len: usize,
    words: Vec<u64>,
}

impl PackedIntArray {
    pub fn new(width: u32, len: usize) -> Result<Self> {
        if !(1..=64).contains(&width) {
            return Err(Error::InvalidWidth(width));
        }
        Ok(Self {
            width,
            len,
            words: vec![0; (len * width as usize).div_ceil(WORD)],
        })
    }

    /// Packs `values` using the narrowest width that fits the maximum.
    pub fn from_values(values: &[u64]) -> Self {
        let width = bits_for(values.iter().copied().max().unwrap_or(0));
        Self::with_width(width, values).expect("width derived from the maximum")
    }

    pub fn with_width(width: u32, values: &[u64]) -> Result<Self> {
        let mut arr = Self::new(width, values.len())?;
        for (i, &v) in values.iter().enumerate() {
            arr.set(i, v)?;
        }
        Ok(arr)
    }

    pub fn from_words(width: u32, len: usize, words: Vec<u64>) -> Result<Self> {
        if !(1..=64).contains(&width) {
            return Err(Error::InvalidWidth(width));
        }
        let need = (len * width as usize).div_ceil(WORD);
        if words.len() != need {
            return Err(Error::Format(format!(
                "packed array of {len}x{width} bits needs {need} words, got {}",
                words.len()
            )));
        }
        Ok(Self { width, len, words })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Payload size in bits, excluding word padding.
    pub fn payload_bits(&self) -> usize {
        self.len * self.width as usize
    }

    fn mask(&self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    pub fn get(&self, i: usize) -> Option<u64> {
        if i >= self.len {
            return None;
        }
        let bit = i * self.width as usize;
        let (w, off) = (bit / WORD, bit % WORD);
        let mut v = self.words[w] >> off;
        if off + self.width as usize > WORD {
            v |= self.words[w + 1] << (WORD - off);
        }
        Some(v & self.mask())
    }

    pub fn set(&mut self, i: usize, value: u64) -> Result<()> {
        if i >= self.len {
            return Err(Error::OutOfBounds {
                index: i,
                len: self.len,
            });
        }
        let mask = self.mask();
        if value & !mask != 0 {
            return Err(Error::ValueTooWide {
                value,
                width: self.width,
            });
        }
        let bit = i * self.width as usize;
        let (w, off) = (bit / WORD, bit % WORD);
        self.words[w] = (self.words[w] & !(mask << off)) | (value << off);
        if off + self.width as usize > WORD {
            let spill = WORD - off;
            let hi_mask = mask >> spill;
            self.words[w + 1] = (self.words[w + 1] & !hi_mask) | (value >> spill);
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_rank(bits: &[bool], bit: bool, p: usize) -> usize {
        bits[..p].iter().filter(|&&b| b == bit).count()
    }

    fn naive_select(bits: &[bool], bit: bool, j: usize) -> Option<usize> {
        bits.iter()
            .enumerate()
            .filter(|(_, &b)| b == bit)
            .nth(j.checked_sub(1)?)
            .map(|(i, _)| i)
    }

    #[test]
    fn rank_examples() {
        let bv = BitVector::from_str_bits("101100");
        assert_eq!(bv.rank1(4), 3);
        assert_eq!(bv.rank1(0), 0);
        let zeros = BitVector::from_bits(std::iter::repeat_n(false, 64));
        assert_eq!(zeros.rank0(64), 64);
        assert!(matches!(bv.rank(true, 7), Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn select_examples() {
        let bv = BitVector::from_str_bits("101100");
        assert_eq!(bv.select1(2), Some(2));
        assert_eq!(bv.select1(1), Some(0));
        assert_eq!(BitVector::from_str_bits("000100").select1(1), Some(3));
        assert!(matches!(bv.select(true, 4), Err(Error::NotFound { .. })));
        assert!(bv.select(true, 0).is_err());
        assert_eq!(bv.select0(3), Some(5));
    }

    #[test]
    fn empty_vector() {
        let bv = BitVector::from_bits(std::iter::empty());
        assert_eq!(bv.rank1(0), 0);
        assert_eq!(bv.select1(1), None);
        assert_eq!(bv.select0(1), None);
    }

    #[test]
    fn random_vectors_match_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let len = rng.gen_range(1..=100_000usize);
            let density = rng.gen_range(0.01..0.99);
            let bits: Vec<bool> = (0..len).map(|_| rng.gen_bool(density)).collect();
            let bv = BitVector::from_bits(bits.iter().copied());
            let mut prefix = vec![0usize; len + 1];
            for i in 0..len {
                prefix[i + 1] = prefix[i] + bits[i] as usize;
            }
            for _ in 0..32 {
                let p = rng.gen_range(0..=len);
                assert_eq!(bv.rank1(p), prefix[p]);
                assert_eq!(bv.rank0(p), p - prefix[p]);
            }
            let ones = prefix[len];
            if ones > 0 {
                let j = rng.gen_range(1..=ones);
                let p = bv.select1(j).unwrap();
                assert!(bits[p]);
                assert_eq!(prefix[p], j - 1);
            }
            if ones < len {
                let j = rng.gen_range(1..=len - ones);
                let p = bv.select0(j).unwrap();
                assert!(!bits[p]);
                assert_eq!(p - prefix[p], j - 1);
            }
        }
    }

    #[test]
    fn long_vectors_match_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &len in &[1usize, 63, 64, 65, 511, 512, 513, 4096, 100_000] {
            let bits: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.3)).collect();
            let bv = BitVector::from_bits(bits.iter().copied());
            for p in (0..=len).step_by(1 + len / 500) {
                assert_eq!(bv.rank1(p), naive_rank(&bits, true, p));
            }
            assert_eq!(bv.rank1(len), naive_rank(&bits, true, len));
            for j in (1..=bv.count_ones()).step_by(1 + len / 700) {
                assert_eq!(bv.select1(j), naive_select(&bits, true, j));
            }
            for j in (1..=bv.count_zeros()).step_by(1 + len / 700) {
                assert_eq!(bv.select0(j), naive_select(&bits, false, j));
            }
        }
    }

    proptest! {
        #[test]
        fn select_is_right_inverse_of_rank(bits in proptest::collection::vec(any::<bool>(), 1..3000)) {
            let bv = BitVector::from_bits(bits.iter().copied());
            for j in 1..=bv.count_ones() {
                let p = bv.select1(j).unwrap();
                prop_assert_eq!(bv.rank1(p + 1), j);
                prop_assert_eq!(bv.rank1(p), j - 1);
            }
            for j in 1..=bv.count_zeros() {
                let p = bv.select0(j).unwrap();
                prop_assert_eq!(bv.rank0(p + 1), j);
            }
            for p in 0..=bits.len() {
                prop_assert_eq!(bv.rank1(p) + bv.rank0(p), p);
            }
        }

        #[test]
        fn packed_roundtrip(width in 1u32..=64, values in proptest::collection::vec(any::<u64>(), 0..200)) {
            let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
            let values: Vec<u64> = values.into_iter().map(|v| v & mask).collect();
            let arr = PackedIntArray::with_width(width, &values).unwrap();
            prop_assert_eq!(arr.words().len(), (values.len() * width as usize).div_ceil(64));
            prop_assert_eq!(arr.iter().collect::<Vec<_>>(), values);
        }
    }

    #[test]
    fn packed_examples() {
        let mut a = PackedIntArray::new(3, 4).unwrap();
        a.set(0, 5).unwrap();
        assert_eq!(a.get(0), Some(5));
        assert_eq!(a.get(1), Some(0));

        let mut bits = PackedIntArray::new(1, 10).unwrap();
        bits.set(3, 1).unwrap();
        assert_eq!(
            bits.iter().collect::<Vec<_>>(),
            vec![0, 0, 0, 1, 0, 0, 0, 0, 0, 0]
        );

        let mut a = PackedIntArray::new(7, 100).unwrap();
        for i in 0..100 {
            a.set(i, (i % 128) as u64).unwrap();
        }
        for i in 0..100 {
            assert_eq!(a.get(i), Some((i % 128) as u64));
        }
        assert_eq!(a.words().len(), 11);
    }

    #[test]
    fn packed_errors() {
        let mut a = PackedIntArray::new(3, 4).unwrap();
        assert!(matches!(a.set(4, 1), Err(Error::OutOfBounds { .. })));
        assert!(matches!(a.set(0, 8), Err(Error::ValueTooWide { .. })));
        assert_eq!(a.get(4), None);
        assert!(PackedIntArray::new(0, 1).is_err());
        assert!(PackedIntArray::new(65, 1).is_err());
    }

    #[test]
    fn set_leaves_neighbours_alone() {
        let mut a = PackedIntArray::new(13, 20).unwrap();
        for i in 0..20 {
            a.set(i, 0x1fff).unwrap();
        }
        a.set(9, 0).unwrap();
        for i in 0..20 {
            assert_eq!(a.get(i), Some(if i == 9 { 0 } else { 0x1fff }));
        }
    }

    #[test]
    fn bits_for_values() {
        assert_eq!(bits_for(0), 1);
        assert_eq!(bits_for(1), 1);
        assert_eq!(bits_for(2), 2);
        assert_eq!(bits_for(255), 8);
        assert_eq!(bits_for(256), 9);
    }
}
