//! Compare a 2D block tree against a k²-tree on repetitive and random input.

use blocktree2d::fixtures;
use blocktree2d::{BitMatrix, BuildParams, K2Tree, TwoDBlockTree};

fn report(name: &str, m: &BitMatrix) -> blocktree2d::Result<()> {
    let (bt, trace) = TwoDBlockTree::build_traced(m, &BuildParams::default())?;
    let k2 = K2Tree::build(m)?;
    println!(
        "{name:<28} k2tree {:>8} bits   bt2d {:>8} bits   ratio {:.3}   references {}",
        k2.total_bits(),
        bt.total_bits(),
        bt.total_bits() as f64 / k2.total_bits() as f64,
        trace.links.len()
    );
    let b = bt.size_breakdown();
    println!(
        "{:<28} T {} L {} N {} P {} O {} D {}",
        "", b.t, b.l, b.n, b.p, b.o, b.d
    );
    Ok(())
}

fn main() -> blocktree2d::Result<()> {
    report("tiled 512, tile 64", &fixtures::tiled(512, 64, 0.1, 2, 1)?)?;
    report(
        "shifted 512, period 50",
        &fixtures::shifted(512, 50, 0.1, 2, 1)?,
    )?;
    report(
        "uniform 512, density 0.5",
        &fixtures::uniform(512, 0.5, 2, 1)?,
    )?;
    report(
        "uniform 512, density 0.05",
        &fixtures::uniform(512, 0.05, 2, 1)?,
    )?;
    Ok(())
}
