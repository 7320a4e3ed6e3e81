//! Rank and select on a bitvector, and a fixed-width packed integer array.

use blocktree2d::succinct::{BitVector, PackedIntArray};

fn main() {
    let bv = BitVector::from_str_bits("1101 0010 0111");
    println!(
        "bits       {}",
        bv.iter()
            .map(|b| if b { '1' } else { '0' })
            .collect::<String>()
    );
    for p in [0, 4, 8, bv.len()] {
        println!(
            "rank1({p:2}) = {}   rank0({p:2}) = {}",
            bv.rank1(p),
            bv.rank0(p)
        );
    }
    for j in 1..=bv.count_ones() {
        println!("select1({j}) = {}", bv.select1(j).unwrap());
    }
    println!("select0(99) = {:?}", bv.select0(99));

    let values = [3, 0, 17, 42, 5];
    let packed = PackedIntArray::from_values(&values);
    println!(
        "{} values packed at {} bits each: {:?}",
        packed.len(),
        packed.width(),
        packed.iter().collect::<Vec<_>>()
    );
}
