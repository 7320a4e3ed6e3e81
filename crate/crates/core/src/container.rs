//! Binary container for both structures.
//!
//! All integers are little-endian. The fixed header is
//!
//! ```text
//! "B2DT" | version u8 | kind u8 (0 k²-tree, 1 block tree) | k u8
//! rows u64 | cols u64 | side u64 | kr_modulus u64 | kr_base u64
//! ```
//!
//! followed by the sections `T`, `L`, `N` (bit count u64, then words), `D`
//! (entry count u64, width u8, words) and, for a block tree, one record per
//! depth `1..height`: entry count u64, `P` width u8, `P` words, `O` width u8,
//! `O` words. A k²-tree stores an empty `N` and `D` and no depth records.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::bt2d::{PointerLevel, TwoDBlockTree};
use crate::error::{Error, Result};
use crate::fingerprint::KarpRabin;
use crate::k2tree::K2Tree;
use crate::matrix::{BitGrid, Region};
use crate::query::CompressedMatrix;
use crate::succinct::{BitVector, PackedIntArray};

pub const MAGIC: &[u8; 4] = b"B2DT";
pub const VERSION: u8 = 1;
/// Size of the fixed header in bytes.
pub const HEADER_BYTES: usize = 4 + 3 + 5 * 8;

const KIND_K2: u8 = 0;
const KIND_BT2D: u8 = 1;

/// Either structure, as stored in a container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Structure {
    K2(K2Tree),
    Bt2d(TwoDBlockTree),
}

impl From<K2Tree> for Structure {
    fn from(t: K2Tree) -> Self {
        Structure::K2(t)
    }
}

impl From<TwoDBlockTree> for Structure {
    fn from(t: TwoDBlockTree) -> Self {
        Structure::Bt2d(t)
    }
}

fn padding(bits: usize) -> usize {
    bits.div_ceil(64) * 64 - bits
}

impl Structure {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Structure::K2(_) => "k2tree",
            Structure::Bt2d(_) => "bt2d",
        }
    }

    fn inner(&self) -> &dyn CompressedMatrix {
        match self {
            Structure::K2(t) => t,
            Structure::Bt2d(t) => t,
        }
    }

    pub fn as_bt2d(&self) -> Option<&TwoDBlockTree> {
        match self {
            Structure::Bt2d(t) => Some(t),
            Structure::K2(_) => None,
        }
    }

    /// Bits a stored container spends beyond `total_bits`: the header,
    /// length and width prefixes, and word padding of every section.
    pub fn framing_bits(&self) -> usize {
        let bitvec = |len: usize| 64 + padding(len);
        let packed = |a: &PackedIntArray| 64 + 8 + padding(a.payload_bits());
        let mut bits = HEADER_BYTES * 8;
        match self {
            Structure::K2(t) => {
                bits += bitvec(t.tree().len()) + bitvec(t.leaves().len()) + bitvec(0);
                bits += packed(&PackedIntArray::from_values(&[]));
            }
            Structure::Bt2d(t) => {
                bits += bitvec(t.tree().len()) + bitvec(t.leaves().len()) + bitvec(t.kinds().len());
                bits += packed(&t.accumulator_array());
                for level in t.levels() {
                    bits += 64 + 8 + padding(level.distances.payload_bits());
                    bits += 8 + padding(level.offsets.payload_bits());
                }
            }
        }
        bits
    }

    pub fn store<W: Write>(&self, out: W) -> Result<()> {
        let mut w = Writer(out);
        let (kind, kr) = match self {
            Structure::K2(_) => (KIND_K2, (0, 0)),
            Structure::Bt2d(t) => (KIND_BT2D, (t.karp_rabin().modulus(), t.karp_rabin().base())),
        };
        w.bytes(MAGIC)?;
        w.bytes(&[VERSION, kind, self.k() as u8])?;
        for v in [
            self.rows() as u64,
            self.cols() as u64,
            self.side() as u64,
            kr.0,
            kr.1,
        ] {
            w.u64(v)?;
        }
        match self {
            Structure::K2(t) => {
                w.bitvec(t.tree())?;
                w.bitvec(t.leaves())?;
                w.bitvec(&BitVector::from_bits([]))?;
                w.packed(&PackedIntArray::from_values(&[]))?;
            }
            Structure::Bt2d(t) => {
                w.bitvec(t.tree())?;
                w.bitvec(t.leaves())?;
                w.bitvec(t.kinds())?;
                w.packed(&t.accumulator_array())?;
                for level in t.levels() {
                    w.u64(level.len() as u64)?;
                    w.bytes(&[level.distances.width() as u8])?;
                    w.words(level.distances.words())?;
                    w.bytes(&[level.offsets.width() as u8])?;
                    w.words(level.offsets.words())?;
                }
            }
        }
        w.0.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.store(&mut buf).expect("writing to memory");
        buf
    }

    pub fn load<R: Read>(input: R) -> Result<Self> {
        let mut r = Reader(input);
        let mut magic = [0u8; 4];
        r.exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let kind = r.u8()?;
        let k = r.u8()? as usize;
        let rows = r.usize()?;
        let cols = r.usize()?;
        let side = r.usize()?;
        let modulus = r.u64()?;
        let base = r.u64()?;
        let tree = r.bitvec()?;
        let leaves = r.bitvec()?;
        let kinds = r.bitvec()?;
        let acc = r.packed()?;
        let structure = match kind {
            KIND_K2 => {
                if !kinds.is_empty() || !acc.is_empty() || modulus != 0 || base != 0 {
                    return Err(Error::Format(
                        "k2tree container carries block tree data".into(),
                    ));
                }
                Structure::K2(K2Tree::from_parts(k, rows, cols, side, tree, leaves)?)
            }
            KIND_BT2D => {
                let height = crate::matrix::log_k(side, k)?;
                let mut levels = Vec::with_capacity(height as usize);
                for _ in 1..height {
                    let count = r.usize()?;
                    let pw = r.u8()? as u32;
                    let distances = r.packed_payload(pw, count)?;
                    let ow = r.u8()? as u32;
                    let offsets = r.packed_payload(ow, 2 * count)?;
                    levels.push(PointerLevel { distances, offsets });
                }
                let kr = KarpRabin::new(modulus, base).map_err(|e| Error::Format(e.to_string()))?;
                let t = TwoDBlockTree::from_parts(
                    k, rows, cols, side, tree, leaves, kinds, levels, kr,
                )?;
                if t.accumulator_array() != acc {
                    return Err(Error::Format("stored D disagrees with N".into()));
                }
                Structure::Bt2d(t)
            }
            other => return Err(Error::Format(format!("unknown structure kind {other}"))),
        };
        let mut rest = [0u8; 1];
        if r.0.read(&mut rest)? != 0 {
            return Err(Error::Format(
                "trailing bytes after the last section".into(),
            ));
        }
        Ok(structure)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::load(bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.store(BufWriter::new(File::create(path)?))
    }

    pub fn open(path: &Path) -> Result<Self> {
        Self::load(BufReader::new(File::open(path)?))
    }
}

impl CompressedMatrix for Structure {
    fn k(&self) -> usize {
        self.inner().k()
    }

    fn rows(&self) -> usize {
        self.inner().rows()
    }

    fn cols(&self) -> usize {
        self.inner().cols()
    }

    fn side(&self) -> usize {
        self.inner().side()
    }

    fn region(&self, r: &Region) -> Result<BitGrid> {
        self.inner().region(r)
    }

    fn total_bits(&self) -> usize {
        self.inner().total_bits()
    }

    fn cell(&self, x: usize, y: usize) -> Result<bool> {
        self.inner().cell(x, y)
    }
}

struct Writer<W>(W);

impl<W: Write> Writer<W> {
    fn bytes(&mut self, b: &[u8]) -> Result<()> {
        Ok(self.0.write_all(b)?)
    }

    fn u64(&mut self, v: u64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }

    fn words(&mut self, words: &[u64]) -> Result<()> {
        words.iter().try_for_each(|&w| self.u64(w))
    }

    fn bitvec(&mut self, bv: &BitVector) -> Result<()> {
        self.u64(bv.len() as u64)?;
        self.words(bv.words())
    }

    fn packed(&mut self, a: &PackedIntArray) -> Result<()> {
        self.u64(a.len() as u64)?;
        self.bytes(&[a.width() as u8])?;
        self.words(a.words())
    }
}

struct Reader<R>(R);

impl<R: Read> Reader<R> {
    fn exact(&mut self, buf: &mut [u8]) -> Result<()> {
        self.0.read_exact(buf).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => Error::Format("truncated container".into()),
            _ => Error::Io(e),
        })
    }

    fn u8(&mut self) -> Result<u8> {
        let mut b = [0u8; 1];
        self.exact(&mut b)?;
        Ok(b[0])
    }

    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::Format(format!("length {v} does not fit in memory")))
    }

    fn words(&mut self, bits: usize) -> Result<Vec<u64>> {
        // lengths come from the file; grow as data arrives instead of trusting them
        let n = bits.div_ceil(64);
        let mut words = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            words.push(self.u64()?);
        }
        Ok(words)
    }

    fn bitvec(&mut self) -> Result<BitVector> {
        let len = self.usize()?;
        let words = self.words(len)?;
        BitVector::from_words(words, len)
    }

    fn packed(&mut self) -> Result<PackedIntArray> {
        let len = self.usize()?;
        let width = self.u8()? as u32;
        self.packed_payload(width, len)
    }

    fn packed_payload(&mut self, width: u32, len: usize) -> Result<PackedIntArray> {
        if !(1..=64).contains(&width) {
            return Err(Error::Format(format!("packed width {width}")));
        }
        let bits = len
            .checked_mul(width as usize)
            .ok_or_else(|| Error::Format(format!("packed length {len} overflows")))?;
        let words = self.words(bits)?;
        PackedIntArray::from_words(width, len, words)
    }
}
