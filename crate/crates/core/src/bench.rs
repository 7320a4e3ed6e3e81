//! Query benchmark over one or two containers of the same matrix.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bt2d::{BuildParams, QueryStats, TwoDBlockTree};
use crate::container::Structure;
use crate::error::{Error, Result};
use crate::k2tree::K2Tree;
use crate::matrix::{BitGrid, BitMatrix, Region};
use crate::query::CompressedMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub queries: usize,
    pub seed: u64,
    /// Extra reader threads replaying the workload; 0 or 1 disables the check.
    pub readers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            queries: 1000,
            seed: 0,
            readers: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Latency {
    pub mean_ns: f64,
    pub median_ns: f64,
}

impl Latency {
    fn from_samples(mut ns: Vec<u64>) -> Self {
        if ns.is_empty() {
            return Self::default();
        }
        ns.sort_unstable();
        let mid = ns.len() / 2;
        let median_ns = if ns.len().is_multiple_of(2) {
            (ns[mid - 1] + ns[mid]) as f64 / 2.0
        } else {
            ns[mid] as f64
        };
        Self {
            mean_ns: ns.iter().sum::<u64>() as f64 / ns.len() as f64,
            median_ns,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub kind: &'static str,
    pub total_bits: usize,
    pub bits_per_edge: f64,
    pub direct: Latency,
    pub reverse: Latency,
    /// Followed references and levels climbed, block trees only.
    pub upwalk: Option<QueryStats>,
    /// Time to rebuild this structure from the decoded matrix.
    pub build: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub edges: usize,
    pub queries: usize,
    pub seed: u64,
    pub structures: Vec<StructureReport>,
    /// Reader threads that replayed the workload and agreed.
    pub readers: usize,
}

impl BenchReport {
    fn ratio(&self, f: impl Fn(&StructureReport) -> f64) -> Option<f64> {
        match self.structures.as_slice() {
            [a, b] => Some(f(a) / f(b)),
            _ => None,
        }
    }

    /// First structure's size over the second's.
    pub fn ratio_bits(&self) -> Option<f64> {
        self.ratio(|s| s.total_bits as f64)
    }

    pub fn ratio_direct(&self) -> Option<f64> {
        self.ratio(|s| s.direct.mean_ns)
    }

    pub fn ratio_reverse(&self) -> Option<f64> {
        self.ratio(|s| s.reverse.mean_ns)
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "edges={}", self.edges)?;
        writeln!(f, "queries={}", self.queries)?;
        writeln!(f, "seed={}", self.seed)?;
        for (i, s) in self.structures.iter().enumerate() {
            let p = if i == 0 { "a" } else { "b" };
            writeln!(f, "{p}.structure={}", s.kind)?;
            writeln!(f, "{p}.total_bits={}", s.total_bits)?;
            writeln!(f, "{p}.bits_per_edge={:.4}", s.bits_per_edge)?;
            writeln!(f, "{p}.direct_mean_ns={:.1}", s.direct.mean_ns)?;
            writeln!(f, "{p}.direct_median_ns={:.1}", s.direct.median_ns)?;
            writeln!(f, "{p}.reverse_mean_ns={:.1}", s.reverse.mean_ns)?;
            writeln!(f, "{p}.reverse_median_ns={:.1}", s.reverse.median_ns)?;
            if let Some(up) = &s.upwalk {
                writeln!(f, "{p}.hops={}", up.hops)?;
                writeln!(f, "{p}.mean_upwalk={:.4}", up.mean_upwalk())?;
            }
            writeln!(f, "{p}.build_ns={}", s.build.as_nanos())?;
        }
        if let (Some(bits), Some(direct), Some(reverse)) =
            (self.ratio_bits(), self.ratio_direct(), self.ratio_reverse())
        {
            writeln!(f, "ratio_bits={bits:.4}")?;
            writeln!(f, "ratio_direct_time={direct:.4}")?;
            writeln!(f, "ratio_reverse_time={reverse:.4}")?;
        }
        if self.readers > 1 {
            writeln!(f, "readers={}", self.readers)?;
        }
        Ok(())
    }
}

/// `count` node ids drawn uniformly from `0..limit`.
pub fn sample_nodes(limit: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(0..limit)).collect()
}

fn decode(s: &Structure) -> Result<BitGrid> {
    s.region(&Region::new(0, 0, s.cols() - 1, s.rows() - 1)?)
}

fn to_matrix(grid: &BitGrid, k: usize) -> Result<BitMatrix> {
    let cells = grid.ones().map(|i| (i % grid.width(), i / grid.width()));
    BitMatrix::from_cells(grid.height(), grid.width(), k, cells)
}

struct Workload {
    direct: Vec<usize>,
    reverse: Vec<usize>,
}

type Answers = (Vec<Vec<usize>>, Vec<Vec<usize>>);

fn replay(s: &Structure, w: &Workload) -> Result<Answers> {
    let direct = w
        .direct
        .iter()
        .map(|&v| s.direct_neighbors(v))
        .collect::<Result<_>>()?;
    let reverse = w
        .reverse
        .iter()
        .map(|&v| s.reverse_neighbors(v))
        .collect::<Result<_>>()?;
    Ok((direct, reverse))
}

fn timed(nodes: &[usize], mut query: impl FnMut(usize) -> Result<Vec<usize>>) -> Result<Latency> {
    let mut samples = Vec::with_capacity(nodes.len());
    for &v in nodes {
        let start = Instant::now();
        let out = query(v)?;
        samples.push(start.elapsed().as_nanos() as u64);
        std::hint::black_box(out);
    }
    Ok(Latency::from_samples(samples))
}

fn measure(s: &Structure, w: &Workload, m: &BitMatrix, edges: usize) -> Result<StructureReport> {
    let direct = timed(&w.direct, |v| s.direct_neighbors(v))?;
    let reverse = timed(&w.reverse, |v| s.reverse_neighbors(v))?;
    let upwalk = match s.as_bt2d() {
        Some(t) => {
            let mut stats = QueryStats::default();
            for &v in &w.direct {
                t.access_with_stats(&Region::row(v, t.side()), &mut stats)?;
            }
            for &v in &w.reverse {
                t.access_with_stats(&Region::column(v, t.side()), &mut stats)?;
            }
            Some(stats)
        }
        None => None,
    };
    let start = Instant::now();
    match s {
        Structure::K2(_) => drop(K2Tree::build(m)?),
        Structure::Bt2d(_) => drop(TwoDBlockTree::build(m, &BuildParams::default())?),
    }
    let build = start.elapsed();
    let total_bits = s.total_bits();
    Ok(StructureReport {
        kind: s.kind_name(),
        total_bits,
        bits_per_edge: if edges == 0 {
            0.0
        } else {
            total_bits as f64 / edges as f64
        },
        direct,
        reverse,
        upwalk,
        build,
    })
}

/// Runs the sampled neighbor workload on each structure.
pub fn run(structures: &[&Structure], config: &BenchConfig) -> Result<BenchReport> {
    let Some(&first) = structures.first() else {
        return Err(Error::InvalidParameter(
            "bench needs at least one container".into(),
        ));
    };
    if structures.len() > 2 {
        return Err(Error::InvalidParameter(
            "bench takes at most two containers".into(),
        ));
    }
    if config.queries == 0 {
        return Err(Error::InvalidParameter(
            "query count must be positive".into(),
        ));
    }
    let grid = decode(first)?;
    for &other in &structures[1..] {
        let dims = |s: &Structure| (s.rows(), s.cols(), s.side(), s.k());
        if dims(first) != dims(other) {
            return Err(Error::Mismatch(format!(
                "{:?} vs {:?} (rows, cols, side, k)",
                dims(first),
                dims(other)
            )));
        }
        if decode(other)? != grid {
            return Err(Error::Mismatch("cell contents differ".into()));
        }
    }
    let m = to_matrix(&grid, first.k())?;
    let edges = grid.count_ones();
    let w = Workload {
        direct: sample_nodes(first.rows(), config.queries, config.seed),
        reverse: sample_nodes(first.cols(), config.queries, config.seed.wrapping_add(1)),
    };

    let mut reports = Vec::new();
    for &s in structures {
        if config.readers > 1 {
            check_readers(s, &w, config.readers)?;
        }
        reports.push(measure(s, &w, &m, edges)?);
    }
    Ok(BenchReport {
        edges,
        queries: config.queries,
        seed: config.seed,
        structures: reports,
        readers: config.readers.max(1),
    })
}

/// Replays the workload from several threads and compares every answer.
fn check_readers(s: &Structure, w: &Workload, readers: usize) -> Result<()> {
    let expected = replay(s, w)?;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..readers).map(|_| scope.spawn(|| replay(s, w))).collect();
        for h in handles {
            let got = h.join().expect("reader thread panicked")?;
            if got != expected {
                return Err(Error::Mismatch("concurrent readers disagree".into()));
            }
        }
        Ok(())
    })
}
