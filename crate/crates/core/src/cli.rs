//! The `bt2d` command line: build, query, extract, stats, bench and gen.
//!
//! Exit codes are 0 on success, 1 for usage errors and 2 for data errors.
//! Reports are printed as `key=value` lines.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{self, BenchConfig};
use crate::bt2d::{BuildParams, TwoDBlockTree};
use crate::container::Structure;
use crate::error::{Error, Result};
use crate::fingerprint::MERSENNE_61;
use crate::fixtures;
use crate::k2tree::K2Tree;
use crate::matrix::{parse_edgelist, parse_pbm, BitMatrix, Region};
use crate::query::CompressedMatrix;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "bt2d",
    version,
    about = "Compressed binary matrices with k2-trees and 2D block trees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Edgelist,
    Pbm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StructureKind {
    K2tree,
    Bt2d,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Direct,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureKind {
    Uniform,
    Tiled,
    Shifted,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress an edge list or PBM bitmap into a container.
    Build {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "edgelist")]
        format: Format,
        #[arg(long, value_enum, default_value = "bt2d")]
        structure: StructureKind,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..))]
        k: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fingerprint modulus for the block tree builder.
        #[arg(long, default_value_t = MERSENNE_61)]
        modulus: u64,
        /// Allow references even where a plain subtree is smaller.
        #[arg(long)]
        no_cost_filter: bool,
        /// Container path; with `--structure both`, `.k2tree` and `.bt2d` are appended.
        #[arg(long)]
        output: PathBuf,
    },
    /// Print the neighbors of a node, one id per line.
    Query {
        container: PathBuf,
        #[arg(long)]
        node: usize,
        #[arg(long, value_enum, default_value = "direct")]
        direction: Direction,
    },
    /// Write a region as a P4 bitmap.
    Extract {
        container: PathBuf,
        /// Inclusive corners as `x1,y1,x2,y2`.
        #[arg(long)]
        region: Region,
        #[arg(long)]
        output: PathBuf,
    },
    /// Print the size breakdown of a container.
    Stats { container: PathBuf },
    /// Time neighbor queries on one or two containers of the same matrix.
    Bench {
        #[arg(required = true, num_args = 1..=2)]
        containers: Vec<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Reader threads that replay the workload and must agree.
        #[arg(long, default_value_t = 0)]
        readers: usize,
    },
    /// Generate a synthetic matrix.
    Gen {
        #[arg(long, value_enum)]
        kind: FixtureKind,
        #[arg(long)]
        side: usize,
        #[arg(long, default_value_t = 0.1)]
        density: f64,
        /// Tile side or copy period.
        #[arg(long)]
        period: Option<usize>,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..))]
        k: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "edgelist")]
        format: Format,
        #[arg(long)]
        output: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::InvalidParameter(_) | Error::InvalidArity(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        }
    }
}

fn read_matrix(path: &Path, format: Format, k: usize) -> Result<BitMatrix> {
    let file = BufReader::new(File::open(path)?);
    match format {
        Format::Edgelist => parse_edgelist(file, k),
        Format::Pbm => parse_pbm(file, k),
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_sizes(out: &mut dyn Write, prefix: &str, s: &Structure) -> Result<()> {
    writeln!(out, "{prefix}structure={}", s.kind_name())?;
    writeln!(out, "{prefix}total_bits={}", s.total_bits())?;
    match s {
        Structure::K2(t) => {
            writeln!(out, "{prefix}t_bits={}", t.tree().len())?;
            writeln!(out, "{prefix}l_bits={}", t.leaves().len())?;
        }
        Structure::Bt2d(t) => {
            let b = t.size_breakdown();
            writeln!(out, "{prefix}t_bits={}", b.t)?;
            writeln!(out, "{prefix}l_bits={}", b.l)?;
            writeln!(out, "{prefix}n_bits={}", b.n)?;
            writeln!(out, "{prefix}p_bits={}", b.p)?;
            writeln!(out, "{prefix}o_bits={}", b.o)?;
            writeln!(out, "{prefix}d_bits={}", b.d)?;
            writeln!(out, "{prefix}back_refs={}", t.back_ref_count())?;
        }
    }
    writeln!(
        out,
        "{prefix}file_bits={}",
        s.total_bits() + s.framing_bits()
    )?;
    Ok(())
}

fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Build {
            input,
            format,
            structure,
            k,
            seed,
            modulus,
            no_cost_filter,
            output,
        } => {
            let m = read_matrix(&input, format, k as usize)?;
            let params = BuildParams {
                modulus,
                seed,
                cost_filter: !no_cost_filter,
            };
            writeln!(out, "rows={}", m.rows())?;
            writeln!(out, "cols={}", m.cols())?;
            writeln!(out, "side={}", m.side())?;
            writeln!(out, "k={k}")?;
            writeln!(out, "edges={}", m.count_ones())?;
            let build = |kind: StructureKind| -> Result<(Structure, u128)> {
                let start = Instant::now();
                let s: Structure = match kind {
                    StructureKind::K2tree => K2Tree::build(&m)?.into(),
                    _ => TwoDBlockTree::build(&m, &params)?.into(),
                };
                Ok((s, start.elapsed().as_nanos()))
            };
            let targets = match structure {
                StructureKind::Both => vec![
                    (
                        StructureKind::K2tree,
                        with_suffix(&output, ".k2tree"),
                        "k2tree.",
                    ),
                    (StructureKind::Bt2d, with_suffix(&output, ".bt2d"), "bt2d."),
                ],
                kind => vec![(kind, output.clone(), "")],
            };
            let mut totals = Vec::new();
            for (kind, path, prefix) in targets {
                let (s, ns) = build(kind)?;
                s.save(&path)?;
                write_sizes(out, prefix, &s)?;
                writeln!(out, "{prefix}build_ns={ns}")?;
                writeln!(out, "{prefix}output={}", path.display())?;
                totals.push(s.total_bits());
            }
            if let [k2, bt] = totals[..] {
                writeln!(out, "ratio_bits={:.4}", bt as f64 / k2 as f64)?;
            }
        }
        Command::Query {
            container,
            node,
            direction,
        } => {
            let s = Structure::open(&container)?;
            let ids = match direction {
                Direction::Direct => s.direct_neighbors(node)?,
                Direction::Reverse => s.reverse_neighbors(node)?,
            };
            for id in ids {
                writeln!(out, "{id}")?;
            }
        }
        Command::Extract {
            container,
            region,
            output,
        } => {
            let s = Structure::open(&container)?;
            if region.x_max >= s.cols() || region.y_max >= s.rows() {
                return Err(Error::RegionOutOfBounds(format!(
                    "{region} in a {}x{} matrix",
                    s.rows(),
                    s.cols()
                )));
            }
            let grid = s.region(&region)?;
            let mut w = BufWriter::new(File::create(&output)?);
            grid.write_pbm_p4(&mut w)?;
            w.flush()?;
            writeln!(out, "width={}", grid.width())?;
            writeln!(out, "height={}", grid.height())?;
            writeln!(out, "ones={}", grid.count_ones())?;
        }
        Command::Stats { container } => {
            let s = Structure::open(&container)?;
            writeln!(out, "rows={}", s.rows())?;
            writeln!(out, "cols={}", s.cols())?;
            writeln!(out, "side={}", s.side())?;
            writeln!(out, "k={}", s.k())?;
            write_sizes(out, "", &s)?;
            writeln!(out, "framing_bits={}", s.framing_bits())?;
            if let Some(t) = s.as_bt2d() {
                writeln!(out, "height={}", t.height())?;
                for (i, level) in t.levels().iter().enumerate() {
                    writeln!(out, "depth{}.back_refs={}", i + 1, level.len())?;
                }
            }
        }
        Command::Bench {
            containers,
            queries,
            seed,
            readers,
        } => {
            let loaded = containers
                .iter()
                .map(|p| Structure::open(p))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&Structure> = loaded.iter().collect();
            let config = BenchConfig {
                queries,
                seed,
                readers,
            };
            write!(out, "{}", bench::run(&refs, &config)?)?;
        }
        Command::Gen {
            kind,
            side,
            density,
            period,
            k,
            seed,
            format,
            output,
        } => {
            let k = k as usize;
            let m = match (kind, period) {
                (FixtureKind::Uniform, _) => fixtures::uniform(side, density, k, seed)?,
                (FixtureKind::Tiled, Some(p)) => fixtures::tiled(side, p, density, k, seed)?,
                (FixtureKind::Shifted, Some(p)) => fixtures::shifted(side, p, density, k, seed)?,
                (_, None) => {
                    return Err(Error::InvalidParameter(
                        "--period is required for tiled and shifted matrices".into(),
                    ))
                }
            };
            let mut w = BufWriter::new(File::create(&output)?);
            match format {
                Format::Edgelist => m.write_edgelist(&mut w)?,
                Format::Pbm => m.to_grid().write_pbm_p4(&mut w)?,
            }
            w.flush()?;
            writeln!(out, "side={side}")?;
            writeln!(out, "edges={}", m.count_ones())?;
        }
    }
    Ok(())
}
