//! Deterministic reductions, quadrature rules and seeded randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Sums `values` by a fixed binary tree so the result depends only on the
/// order of the input, never on scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of a mapped sequence.
pub fn pairwise_sum_by<T>(items: &[T], f: impl Fn(&T) -> f64) -> f64 {
    let mapped: Vec<f64> = items.iter().map(f).collect();
    pairwise_sum(&mapped)
}

/// 8-point Gauss–Legendre nodes on [-1, 1].
pub const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];

/// 8-point Gauss–Legendre weights on [-1, 1]; they sum to 2.
pub const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Nodes and weights of the 8-point rule mapped to [a, b].
pub fn gl8_on(a: f64, b: f64) -> [(f64, f64); 8] {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut out = [(0.0, 0.0); 8];
    for k in 0..8 {
        out[k] = (mid + half * GL8_NODES[k], half * GL8_WEIGHTS[k]);
    }
    out
}

/// The crate-wide seeded generator.
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Derives an independent stream for instance `index` of a suite seeded by `seed`.
pub fn split_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_degree_fifteen_exactly() {
        // ∫_{-1}^{1} x^14 dx = 2/15 and odd moments vanish.
        let even: f64 = (0..8).map(|k| GL8_WEIGHTS[k] * GL8_NODES[k].powi(14)).sum();
        assert!((even - 2.0 / 15.0).abs() < 1e-14);
        let odd: f64 = (0..8).map(|k| GL8_WEIGHTS[k] * GL8_NODES[k].powi(15)).sum();
        assert!(odd.abs() < 1e-15);
        let total: f64 = GL8_WEIGHTS.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn pairwise_sum_matches_exact_integer_sum() {
        let values: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&values), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn split_streams_differ() {
        use rand::Rng;
        let a: u64 = split_rng(7, 0).gen();
        let b: u64 = split_rng(7, 1).gen();
        assert_ne!(a, b);
        let again: u64 = split_rng(7, 0).gen();
        assert_eq!(a, again);
    }
}
