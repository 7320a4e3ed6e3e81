//! Store a structure in a container file and load it back.

use blocktree2d::container::Structure;
use blocktree2d::fixtures;
use blocktree2d::{BuildParams, CompressedMatrix, TwoDBlockTree};

fn main() -> blocktree2d::Result<()> {
    let m = fixtures::tiled(256, 32, 0.15, 2, 3)?;
    let s: Structure = TwoDBlockTree::build(&m, &BuildParams::default())?.into();
    let path =
        std::env::temp_dir().join(format!("blocktree2d-example-{}.b2dt", std::process::id()));
    s.save(&path)?;
    let bytes = std::fs::metadata(&path)?.len();
    let loaded = Structure::open(&path)?;
    std::fs::remove_file(&path)?;

    println!(
        "{} payload bits + {} framing bits = {} file bits",
        s.total_bits(),
        s.framing_bits(),
        bytes * 8
    );
    assert_eq!(loaded, s);
    println!("row 5 after reload: {:?}", loaded.direct_neighbors(5)?);
    Ok(())
}
