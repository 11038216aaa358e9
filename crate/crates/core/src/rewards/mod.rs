//! Intrinsic rewards and reward mixing.
//!
//! * [`revd_rewards`]: per-state bonus `L(E)·[νk(eᵢ, prev)/(μk(eᵢ, curr) + ε)]^(1−α)`.
//! * [`re3_rewards`]: within-episode k-NN distance (optionally `ln(1 + ·)`).
//! * [`ride_rewards`]: embedding displacement discounted by an episodic pseudo-count.
//!
//! Neighbor searches only ever see one worker's own episodes.

mod config;
mod mix;
mod re3;
mod revd;
mod ride;

pub use config::{DecayMode, RewardConfig, RewardVariant};
pub use mix::{decay_lambda, mix_rewards};
pub use re3::re3_rewards;
pub use revd::{revd_rewards, scaling_coefficient, IntrinsicRewardBatch, RewardDiagnostics};
pub use ride::{dynamics_loss, dynamics_model, dynamics_update, median_nn_distance, ride_rewards};
