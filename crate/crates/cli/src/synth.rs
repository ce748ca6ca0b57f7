//! Seeded synthetic point sets.

use owcoreset::{Dataset, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// `n` points from a mixture of `clusters` isotropic Gaussians in `R^d`.
///
/// Cluster means are uniform in `[-10, 10]^d`, standard deviations uniform
/// in `[0.5, 2]`, and cluster sizes are skewed so that cluster `j` gets
/// weight proportional to `1 / (j + 1)`.
pub fn gaussian_mixture(n: usize, d: usize, clusters: usize, seed: u64) -> Result<Dataset> {
    let clusters = clusters.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<Vec<f64>> = (0..clusters)
        .map(|_| (0..d).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect();
    let sds: Vec<f64> = (0..clusters).map(|_| rng.random_range(0.5..2.0)).collect();
    let weights: Vec<f64> = (0..clusters).map(|j| 1.0 / (j + 1) as f64).collect();
    let total: f64 = weights.iter().sum();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n {
        let mut u = rng.random_range(0.0..total);
        let mut j = 0;
        while j + 1 < clusters && u >= weights[j] {
            u -= weights[j];
            j += 1;
        }
        for &m in &means[j] {
            let z: f64 = std_normal.sample(&mut rng);
            coords.push(m + sds[j] * z);
        }
    }
    Dataset::from_flat(d, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use owcoreset::WeightedPoints;

    #[test]
    fn deterministic_and_sized() {
        let a = gaussian_mixture(500, 3, 4, 9).unwrap();
        assert_eq!((a.len(), a.dim()), (500, 3));
        assert_eq!(a, gaussian_mixture(500, 3, 4, 9).unwrap());
        assert_ne!(a, gaussian_mixture(500, 3, 4, 10).unwrap());
    }
}
