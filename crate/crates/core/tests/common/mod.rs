#![allow(dead_code)]

use forge_core::geometry::Vector;
use forge_core::polyhedral::{AffinePiece, PolyhedralLoss};
use forge_core::zoo::SetFunction;
use forge_core::Rational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `k / den` with `k` uniform in `lo * den ..= hi * den`.
pub fn rational_in(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Rational {
    Rational::new(rng.random_range(lo * den..=hi * den), den)
}

/// A distribution with positive integer weights in `1..=max_weight`,
/// normalized; coordinates are zeroed with probability `zero_prob` while
/// keeping at least one positive entry.
pub fn distribution(rng: &mut ChaCha8Rng, n: usize, max_weight: i64, zero_prob: f64) -> Vector {
    loop {
        let w: Vec<i64> = (0..n)
            .map(|_| if rng.random_bool(zero_prob) { 0 } else { rng.random_range(1..=max_weight) })
            .collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|x| Rational::new(x, total)).collect();
        }
    }
}

/// Weighted coverage function on `k` elements: each element covers a
/// nonempty random subset of a small universe with positive weights.
/// Coverage functions are normalized, increasing and submodular.
pub fn coverage(rng: &mut ChaCha8Rng, k: usize, disjoint: bool) -> SetFunction {
    let universe = 6usize;
    let weights: Vec<i64> = (0..universe).map(|_| rng.random_range(1..=4)).collect();
    let covers: Vec<u32> = (0..k)
        .map(|i| {
            if disjoint {
                1 << i
            } else {
                rng.random_range(1u32..1 << universe)
            }
        })
        .collect();
    let values = (0..1usize << k)
        .map(|s| {
            let union = (0..k).filter(|i| s >> i & 1 == 1).fold(0u32, |acc, i| acc | covers[i]);
            Rational::from_integer((0..universe).filter(|j| union >> j & 1 == 1).map(|j| weights[j]).sum())
        })
        .collect();
    SetFunction::new(k, values).unwrap()
}

/// A random polyhedral loss with small integer data.
pub fn polyhedral(rng: &mut ChaCha8Rng, d: usize, n: usize, max_pieces: usize) -> PolyhedralLoss {
    let pieces = (0..n)
        .map(|_| {
            (0..rng.random_range(1..=max_pieces))
                .map(|_| {
                    AffinePiece::new(
                        (0..d).map(|_| Rational::from_integer(rng.random_range(-2..=2))).collect(),
                        Rational::from_integer(rng.random_range(-2..=2)),
                    )
                })
                .collect()
        })
        .collect();
    PolyhedralLoss::new(d, (1..=n).map(|i| i.to_string()).collect(), pieces).unwrap()
}

/// Rows of a loss matrix as a sorted multiset.
pub fn sorted_rows(matrix: &[Vector]) -> Vec<Vector> {
    let mut rows = matrix.to_vec();
    rows.sort();
    rows
}
