//! Time neighbor queries on both structures over the same matrix.

use blocktree2d::bench::{self, BenchConfig};
use blocktree2d::container::Structure;
use blocktree2d::fixtures;
use blocktree2d::{BuildParams, K2Tree, TwoDBlockTree};

fn main() -> blocktree2d::Result<()> {
    let m = fixtures::shifted(1024, 90, 0.05, 2, 11)?;
    let bt: Structure = TwoDBlockTree::build(&m, &BuildParams::default())?.into();
    let k2: Structure = K2Tree::build(&m)?.into();
    let config = BenchConfig {
        queries: 500,
        seed: 1,
        readers: 2,
    };
    print!("{}", bench::run(&[&bt, &k2], &config)?);
    Ok(())
}
