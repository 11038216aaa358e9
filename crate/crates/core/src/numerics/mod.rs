//! Deterministic numerical kernel shared by every other module: seeded random
//! streams, log-gamma, Euclidean point sets and exact k-th-nearest-neighbor
//! distances.
//!
//! All arithmetic is `f64`. Distances are true Euclidean distances (square
//! root taken) because the divergence estimator raises distance ratios to
//! fractional powers.

mod knn;
mod points;
mod rng;
mod special;

pub use knn::{
    kth_distances_across, kth_distances_within, kth_nn_distance, kth_nn_distance_to, KdTree,
    NeighborBackend,
};
pub use points::{euclidean, pairwise_distances, PointSet};
pub use rng::{rng_uniform, RngStream};
pub use special::lgamma;
