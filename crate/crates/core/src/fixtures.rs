//! Seeded synthetic matrices used by tests, benchmarks and the `gen` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::BitMatrix;

fn check_density(density: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!(
            "density {density} outside [0, 1]"
        )));
    }
    Ok(())
}

fn random_pattern(rng: &mut ChaCha8Rng, side: usize, density: f64) -> Vec<bool> {
    (0..side * side).map(|_| rng.gen_bool(density)).collect()
}

/// Independent cells, each set with probability `density`.
pub fn uniform(side: usize, density: f64, k: usize, seed: u64) -> Result<BitMatrix> {
    check_density(density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = BitMatrix::new(side, side, k)?;
    for y in 0..side {
        for x in 0..side {
            if rng.gen_bool(density) {
                m.set(x, y, true);
            }
        }
    }
    Ok(m)
}

/// One random `tile x tile` pattern repeated on an aligned grid.
pub fn tiled(side: usize, tile: usize, density: f64, k: usize, seed: u64) -> Result<BitMatrix> {
    periodic(side, tile, density, k, seed)
}

/// A random `period x period` pattern repeated from the origin. When the
/// period is not a power of `k` the copies land at unaligned offsets.
pub fn shifted(side: usize, period: usize, density: f64, k: usize, seed: u64) -> Result<BitMatrix> {
    periodic(side, period, density, k, seed)
}

fn periodic(side: usize, period: usize, density: f64, k: usize, seed: u64) -> Result<BitMatrix> {
    check_density(density)?;
    if period == 0 || period > side {
        return Err(Error::InvalidParameter(format!(
            "period {period} must be in 1..={side}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pattern = random_pattern(&mut rng, period, density);
    let mut m = BitMatrix::new(side, side, k)?;
    for y in 0..side {
        for x in 0..side {
            if pattern[(y % period) * period + x % period] {
                m.set(x, y, true);
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_density_is_close() {
        let m = uniform(256, 0.1, 2, 1).unwrap();
        let d = m.count_ones() as f64 / (256.0 * 256.0);
        assert!((d - 0.1).abs() < 0.01, "{d}");
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(
            uniform(64, 0.3, 2, 9).unwrap(),
            uniform(64, 0.3, 2, 9).unwrap()
        );
        assert_ne!(
            uniform(64, 0.3, 2, 9).unwrap(),
            uniform(64, 0.3, 2, 10).unwrap()
        );
    }

    #[test]
    fn tiles_repeat() {
        let m = tiled(64, 16, 0.3, 2, 4).unwrap();
        for y in 0..64 {
            for x in 0..64 {
                assert_eq!(m.get(x, y), m.get(x % 16, y % 16));
            }
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(uniform(8, 1.5, 2, 0).is_err());
        assert!(shifted(8, 0, 0.5, 2, 0).is_err());
        assert!(shifted(8, 9, 0.5, 2, 0).is_err());
    }
}
