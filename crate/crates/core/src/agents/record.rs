use serde::{Deserialize, Serialize};

/// One row per policy update. Column order is the field order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunRecord {
    pub update: u64,
    pub env_steps: u64,
    /// Mean extrinsic return over the last 100 finished episodes (0 before any finish).
    pub mean_episode_return: f64,
    pub episodes_completed: u64,
    /// Cumulative number of goal reaches.
    pub successes: u64,
    /// Mean and max of the weighted bonus `λ·r̂` added to the rewards.
    pub intrinsic_mean: f64,
    pub intrinsic_max: f64,
    /// Worker-mean scaling coefficient `L` of the current segments.
    pub scaling_l: f64,
    /// Effective intrinsic weight (0 when intrinsic rewards are off).
    pub lambda: f64,
    /// Worker-mean discrepancy estimate between consecutive segments.
    pub d_hat: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub dynamics_loss: f64,
    /// Gradient steps skipped because of non-finite losses or gradients.
    pub skipped_updates: u64,
}

impl RunRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.mean_episode_return,
            self.intrinsic_mean,
            self.intrinsic_max,
            self.scaling_l,
            self.lambda,
            self.d_hat,
            self.policy_loss,
            self.value_loss,
            self.entropy,
            self.dynamics_loss,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}
