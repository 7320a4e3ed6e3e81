//! Rolling Karp-Rabin fingerprints of every square window, and why equal
//! fingerprints are always double-checked.

use blocktree2d::fingerprint::{fingerprint_direct, verify_equal, FingerprintGrid, KarpRabin};
use blocktree2d::fixtures;
use blocktree2d::Region;

fn main() -> blocktree2d::Result<()> {
    let m = fixtures::uniform(64, 0.3, 2, 8)?;
    let kr = KarpRabin::seeded(42);
    let grid = FingerprintGrid::build(&m, 8, &kr)?;
    let direct = fingerprint_direct(&m, &Region::square(13, 29, 8), &kr)?;
    println!(
        "window (13,29): rolled {:#x}, direct {direct:#x}",
        grid.block(29, 13)
    );

    // a tiny modulus makes collisions common
    let small = KarpRabin::seeded_with_modulus(251, 42)?;
    let grid = FingerprintGrid::build(&m, 4, &small)?;
    let target = grid.block(0, 0);
    let mut collisions = 0;
    let mut equal = 0;
    for row in 0..grid.span() {
        for col in 0..grid.span() {
            if (row, col) != (0, 0) && grid.block(row, col) == target {
                collisions += 1;
                if verify_equal(&m, &Region::square(0, 0, 4), &Region::square(col, row, 4))? {
                    equal += 1;
                }
            }
        }
    }
    println!(
        "modulus 251: {collisions} windows share the fingerprint of (0,0), {equal} really match"
    );
    Ok(())
}
