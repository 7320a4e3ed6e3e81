//! Build a k²-tree from an edge list and walk its levelwise bitvectors.

use blocktree2d::matrix::parse_edgelist;
use blocktree2d::{CompressedMatrix, K2Tree};

fn main() -> blocktree2d::Result<()> {
    let edges = "0 1\n1 2\n2 0\n2 3\n5 6\n";
    let m = parse_edgelist(edges.as_bytes(), 2)?;
    let t = K2Tree::build(&m)?;
    println!(
        "{}x{} matrix padded to side {}, height {}",
        m.rows(),
        m.cols(),
        t.side(),
        t.height()
    );
    println!(
        "T = {:?}",
        t.tree().iter().map(u8::from).collect::<Vec<_>>()
    );
    println!(
        "L = {:?}",
        t.leaves().iter().map(u8::from).collect::<Vec<_>>()
    );

    // the first internal node and its children
    if let Some(p) = t.tree().select1(1) {
        let kids = t.children(p)?;
        println!(
            "node {p} has children {kids:?}, whose parent is {}",
            t.parent(kids.start)?
        );
    }
    println!("edge 2 -> 3 present: {}", t.cell(3, 2)?);
    println!("total {} bits", t.total_bits());
    Ok(())
}
