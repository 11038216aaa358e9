//! Shared fixtures for the benchmarks.

use ndarray::Array2;
use revd_core::encoder::EpisodeEmbeddings;
use revd_core::numerics::{PointSet, RngStream};

/// `n` standard-normal points in `d` dimensions, shifted by `offset`.
pub fn gaussian_points(n: usize, d: usize, offset: f64, seed: u64) -> PointSet {
    let mut rng = RngStream::new(seed);
    PointSet::new(Array2::from_shape_fn((n, d), |_| rng.normal() + offset)).expect("finite points")
}

pub fn gaussian_episode(t: usize, d: usize, seed: u64) -> EpisodeEmbeddings {
    EpisodeEmbeddings::new(gaussian_points(t, d, 0.0, seed).into_inner(), 0, 0).expect("valid episode")
}
