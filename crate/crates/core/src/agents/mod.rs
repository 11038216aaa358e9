//! On-policy training: rollouts over vectorized environments, GAE, PPO-clip
//! and A2C updates, and the loop that injects intrinsic rewards.
//!
//! An "episode" for the visitation embeddings is one fixed-length rollout
//! segment per worker. Environment terminals inside a segment reset the
//! environment but not the embedding buffer.

mod actor_critic;
mod config;
mod gae;
mod record;
mod rollout;
mod trainer;

pub use actor_critic::{
    loss_and_grads, total_loss, ActorCritic, ActorCriticGrads, Batch, BatchActions, LossMetrics, LossSettings,
};
pub use config::{AgentConfig, Algo};
pub use gae::compute_gae;
pub use record::RunRecord;
pub use rollout::{collect_rollout, Rollout, WorkerTrajectory};
pub use trainer::{
    build_vec_env, derive_seed, run_training, run_training_with, streams, Trainer, UpdateTrace, WorkerMemory,
};
