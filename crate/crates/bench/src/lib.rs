//! Shared fixtures for the benchmarks.

use fiberaudit_core::quantizer::CodecConfig;
use fiberaudit_core::{DenseMatrix, MapDescriptor, Point, SphereEmbedding};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_points(count: usize, dim: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Point::new((0..dim).map(|_| rng.random_range(-100.0..100.0)).collect()).unwrap())
        .collect()
}

/// The two-point map with a = (0,0), b = (4,0).
pub fn urysohn_map() -> MapDescriptor {
    MapDescriptor::urysohn(
        Point::new(vec![0.0, 0.0]).unwrap(),
        Point::new(vec![4.0, 0.0]).unwrap(),
    )
    .unwrap()
}

/// Projection ℝ³ → ℝ² plus a 0.1-amplitude sinusoid.
pub fn perturbed_map(seed: u64) -> MapDescriptor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..6).map(|_| rng.random_range(-4.0..4.0)).collect();
    let phi: Vec<f64> = (0..2)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    MapDescriptor::perturbed(
        DenseMatrix::projection(2, 3).unwrap(),
        0.1,
        DenseMatrix::new(2, 3, w).unwrap(),
        phi,
    )
    .unwrap()
}

pub fn sphere(dim: usize, carrier: usize, radius: f64) -> SphereEmbedding {
    SphereEmbedding::standard(Point::origin(dim), radius, carrier).unwrap()
}

pub fn codec(n: usize) -> CodecConfig {
    CodecConfig::generic(n, 1, 0.25).unwrap()
}
