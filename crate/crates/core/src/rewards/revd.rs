use serde::{Deserialize, Serialize};

use super::RewardConfig;
use crate::encoder::EpisodeEmbeddings;
use crate::error::{Error, Result};
use crate::numerics::{kth_distances_across, kth_distances_within, NeighborBackend};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardDiagnostics {
    /// States whose within-episode distance μk was exactly zero (ε carried the division).
    pub num_guarded_divisions: usize,
    pub mean_nu: f64,
    pub mean_mu: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntrinsicRewardBatch {
    pub rewards: Vec<f64>,
    pub scaling_l: f64,
    pub diagnostics: RewardDiagnostics,
}

impl IntrinsicRewardBatch {
    pub fn zeros(len: usize) -> Self {
        Self { rewards: vec![0.0; len], ..Self::default() }
    }
}

/// `L(E) = tanh(mean nearest-neighbor distance within E)`, self excluded.
pub fn scaling_coefficient(episode: &EpisodeEmbeddings) -> Result<f64> {
    if episode.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, available: episode.len() });
    }
    let nn = kth_distances_within(&episode.points()?, 1, NeighborBackend::BruteForce)?;
    Ok((nn.iter().sum::<f64>() / nn.len() as f64).tanh())
}

/// Per-state rewards `L(curr)·[νk(eᵢ, prev) / (μk(eᵢ, curr) + ε)]^(1−α)`.
///
/// An empty current episode yields an empty batch.
pub fn revd_rewards(curr: &EpisodeEmbeddings, prev: &EpisodeEmbeddings, cfg: &RewardConfig) -> Result<IntrinsicRewardBatch> {
    if curr.is_empty() {
        return Ok(IntrinsicRewardBatch::default());
    }
    let params = cfg.divergence_params()?;
    let k = params.k();
    if curr.len() < k + 1 {
        return Err(Error::InsufficientSamples { needed: k + 1, available: curr.len() });
    }
    if prev.len() < k {
        return Err(Error::InsufficientSamples { needed: k, available: prev.len() });
    }
    if curr.dim() != prev.dim() {
        return Err(Error::DimensionMismatch { expected: prev.dim(), found: curr.dim() });
    }
    let x = curr.points()?;
    let mu = kth_distances_within(&x, k, NeighborBackend::BruteForce)?;
    let nu = kth_distances_across(&x, &prev.points()?, k, NeighborBackend::BruteForce)?;
    let scaling_l = scaling_coefficient(curr)?;
    let exponent = 1.0 - params.alpha();
    let rewards = mu
        .iter()
        .zip(&nu)
        .map(|(m, n)| scaling_l * (n / (m + cfg.epsilon)).powf(exponent))
        .collect();
    let t = mu.len() as f64;
    Ok(IntrinsicRewardBatch {
        rewards,
        scaling_l,
        diagnostics: RewardDiagnostics {
            num_guarded_divisions: mu.iter().filter(|&&m| m == 0.0).count(),
            mean_nu: nu.iter().sum::<f64>() / t,
            mean_mu: mu.iter().sum::<f64>() / t,
        },
    })
}
