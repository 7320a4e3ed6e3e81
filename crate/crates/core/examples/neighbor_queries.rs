//! Direct and reverse neighbors of a small graph, answered by both structures.

use blocktree2d::matrix::parse_edgelist;
use blocktree2d::{BuildParams, CompressedMatrix, K2Tree, TwoDBlockTree};

fn main() -> blocktree2d::Result<()> {
    // two copies of the same little community, ids 0..4 and 8..12
    let edges = "0 1\n0 2\n1 2\n2 3\n3 0\n8 9\n8 10\n9 10\n10 11\n11 8\n";
    let m = parse_edgelist(edges.as_bytes(), 2)?;
    let structures: [(&str, Box<dyn CompressedMatrix>); 2] = [
        ("k2tree", Box::new(K2Tree::build(&m)?)),
        (
            "bt2d",
            Box::new(TwoDBlockTree::build(&m, &BuildParams::default())?),
        ),
    ];
    for (name, s) in &structures {
        println!("{name}:");
        for v in [0, 2, 10, 5] {
            println!(
                "  out({v}) = {:?}   in({v}) = {:?}",
                s.direct_neighbors(v)?,
                s.reverse_neighbors(v)?
            );
        }
    }
    Ok(())
}
