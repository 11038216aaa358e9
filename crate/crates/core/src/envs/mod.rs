//! Desk-scale environments and wrappers.
//!
//! Every environment is single-owner and fully determined by its construction
//! seed and the action sequence fed to it. Reward wrappers apply in a fixed
//! order: sign clipping first, then random sparsification.

mod chain;
mod fourroom;
mod point_maze;
mod spec;
mod vec_env;
mod wrappers;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::nets::Action;

pub use chain::Chain;
pub use fourroom::{FourRoom, GoalMode, GridObservation};
pub use point_maze::{PointMaze, PointReward};
pub use spec::{BaseEnv, EnvParams, EnvSpec, EnvStack};
pub use vec_env::{VecEnv, VecStep};
pub use wrappers::{reward_clip_sign, sign, sparsify, SignClip, Sparsify};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ActionSpace {
    Discrete(usize),
    Box { dim: usize, low: f64, high: f64 },
}

impl ActionSpace {
    /// Width of the policy network output for this space.
    pub fn policy_output_dim(&self) -> usize {
        match self {
            ActionSpace::Discrete(n) => *n,
            ActionSpace::Box { dim, .. } => *dim,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, ActionSpace::Discrete(_))
    }

    /// One-hot for discrete actions, raw values for continuous ones.
    pub fn encode_action(&self, action: &Action) -> Vec<f64> {
        match (self, action) {
            (ActionSpace::Discrete(n), Action::Discrete(a)) => {
                let mut v = vec![0.0; *n];
                if *a < *n {
                    v[*a] = 1.0;
                }
                v
            }
            (_, Action::Continuous(v)) => v.clone(),
            (ActionSpace::Box { dim, .. }, Action::Discrete(_)) => vec![0.0; *dim],
        }
    }
}

/// Result of one environment transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// Reached a terminal state; the value of the next state is zero.
    pub terminated: bool,
    /// Cut off by the step limit; the next state still has a value.
    pub truncated: bool,
    /// The task goal was reached on this step.
    pub success: bool,
}

impl Step {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// Markov decision process contract shared by all environments and wrappers.
pub trait Environment {
    fn observation_dim(&self) -> usize;
    fn action_space(&self) -> ActionSpace;
    /// Returns to the initial state distribution and yields the first observation.
    fn reset(&mut self) -> Vec<f64>;
    /// Advances one step. Stepping a finished episode is an error until `reset`.
    fn step(&mut self, action: &Action) -> Result<Step>;
}
