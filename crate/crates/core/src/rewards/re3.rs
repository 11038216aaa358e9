use crate::encoder::EpisodeEmbeddings;
use crate::error::{Error, Result};
use crate::numerics::{kth_distances_within, NeighborBackend};

/// Within-episode k-th nearest-neighbor distance per state, or `ln(1 + ·)` of
/// it when `log` is set.
pub fn re3_rewards(curr: &EpisodeEmbeddings, k: usize, log: bool) -> Result<Vec<f64>> {
    if curr.is_empty() {
        return Ok(Vec::new());
    }
    if curr.len() < k + 1 {
        return Err(Error::InsufficientSamples { needed: k + 1, available: curr.len() });
    }
    let mu = kth_distances_within(&curr.points()?, k, NeighborBackend::BruteForce)?;
    Ok(if log { mu.into_iter().map(f64::ln_1p).collect() } else { mu })
}
