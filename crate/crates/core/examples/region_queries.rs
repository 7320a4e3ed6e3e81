//! Extract rectangular regions straight from the compressed form, and look
//! at how a query follows back-references.

use blocktree2d::bt2d::QueryStats;
use blocktree2d::fixtures;
use blocktree2d::{BuildParams, Region, TwoDBlockTree};

fn main() -> blocktree2d::Result<()> {
    let m = fixtures::shifted(256, 37, 0.2, 2, 4)?;
    let t = TwoDBlockTree::build(&m, &BuildParams::default())?;

    let r: Region = "100,40,131,47".parse()?;
    let mut stats = QueryStats::default();
    let grid = t.access_with_stats(&r, &mut stats)?;
    assert_eq!(grid, m.extract_region(&r)?);
    println!("region {r}: {} ones", grid.count_ones());
    for y in 0..grid.height() {
        let row: String = (0..grid.width())
            .map(|x| if grid.get(x, y) { '#' } else { '.' })
            .collect();
        println!("  {row}");
    }
    println!(
        "followed {} references, climbing {:.2} levels on average",
        stats.hops,
        stats.mean_upwalk()
    );

    if let Some(link) = (0..t.tree().len()).find_map(|p| {
        let depth = t.depth_of(p).ok()?;
        t.decode_link(p, depth).ok().map(|l| (depth, l))
    }) {
        let (depth, l) = link;
        println!(
            "first reference: node {} at depth {depth} copies {} shifted by ({}, {})",
            l.target,
            t.node_region(l.ptr_block)?,
            l.offset_x,
            l.offset_y
        );
    }
    Ok(())
}
