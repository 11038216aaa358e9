use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Ppo,
    A2c,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub algo: Algo,
    pub gamma: f64,
    pub gae_lambda: f64,
    /// PPO ratio clip range.
    pub clip: f64,
    /// PPO value clip range; unclipped squared error when unset.
    pub value_clip: Option<f64>,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub normalize_advantages: bool,
    pub learning_rate: f64,
    pub hidden: Vec<usize>,
    pub workers: usize,
    /// Rollout length per worker, also the episode segment length used for
    /// visitation embeddings.
    pub steps_per_episode: usize,
    pub total_env_steps: u64,
}

impl AgentConfig {
    /// PPO settings for discrete-action tasks.
    pub fn ppo_discrete() -> Self {
        Self {
            algo: Algo::Ppo,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip: 0.2,
            value_clip: Some(0.2),
            entropy_coef: 0.05,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            epochs: 5,
            minibatch_size: 64,
            normalize_advantages: true,
            learning_rate: 3e-4,
            hidden: vec![64, 64],
            workers: 10,
            steps_per_episode: 128,
            total_env_steps: 150_000,
        }
    }

    /// PPO settings for continuous-action tasks.
    pub fn ppo_continuous() -> Self {
        Self { entropy_coef: 0.01, ..Self::ppo_discrete() }
    }

    /// Single full-batch actor-critic step per rollout, no advantage normalization.
    pub fn a2c_discrete() -> Self {
        Self {
            algo: Algo::A2c,
            value_clip: None,
            epochs: 1,
            normalize_advantages: false,
            steps_per_episode: 32,
            ..Self::ppo_discrete()
        }
    }

    pub fn a2c_continuous() -> Self {
        Self { entropy_coef: 0.01, steps_per_episode: 8, ..Self::a2c_discrete() }
    }

    pub fn defaults_for(algo: Algo, discrete: bool) -> Self {
        match (algo, discrete) {
            (Algo::Ppo, true) => Self::ppo_discrete(),
            (Algo::Ppo, false) => Self::ppo_continuous(),
            (Algo::A2c, true) => Self::a2c_discrete(),
            (Algo::A2c, false) => Self::a2c_continuous(),
        }
    }

    pub fn transitions_per_update(&self) -> u64 {
        (self.workers * self.steps_per_episode) as u64
    }

    /// Whole updates that fit in the step budget.
    pub fn num_updates(&self) -> u64 {
        self.total_env_steps / self.transitions_per_update().max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(0.0..1.0).contains(&self.gamma) {
            return fail(format!("gamma must lie in [0, 1), got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return fail(format!("gae_lambda must lie in [0, 1], got {}", self.gae_lambda));
        }
        if !(self.clip > 0.0) {
            return fail(format!("clip must be > 0, got {}", self.clip));
        }
        if let Some(c) = self.value_clip {
            if !(c > 0.0) {
                return fail(format!("value_clip must be > 0, got {c}"));
            }
        }
        for (name, v) in [("entropy_coef", self.entropy_coef), ("value_coef", self.value_coef)] {
            if !(v >= 0.0) || !v.is_finite() {
                return fail(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !(self.max_grad_norm > 0.0) {
            return fail(format!("max_grad_norm must be > 0, got {}", self.max_grad_norm));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return fail(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if self.workers == 0 {
            return fail("workers must be >= 1".into());
        }
        if self.steps_per_episode == 0 || self.epochs == 0 || self.minibatch_size == 0 {
            return fail("steps_per_episode, epochs and minibatch_size must be >= 1".into());
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return fail(format!("hidden sizes must be non-empty and >= 1, got {:?}", self.hidden));
        }
        if self.num_updates() == 0 {
            return fail(format!(
                "total_env_steps {} is smaller than one update ({} workers x {} steps)",
                self.total_env_steps, self.workers, self.steps_per_episode
            ));
        }
        Ok(())
    }
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self::ppo_discrete()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for cfg in [AgentConfig::ppo_discrete(), AgentConfig::ppo_continuous(), AgentConfig::a2c_discrete(), AgentConfig::a2c_continuous()] {
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn transitions_per_update_with_ten_workers() {
        let cfg = AgentConfig { steps_per_episode: 256, ..AgentConfig::default() };
        assert_eq!(cfg.transitions_per_update(), 2560);
    }

    #[test]
    fn rejects_bad_values() {
        let base = AgentConfig::default();
        assert!(AgentConfig { gamma: 1.0, ..base.clone() }.validate().is_err());
        assert!(AgentConfig { clip: 0.0, ..base.clone() }.validate().is_err());
        assert!(AgentConfig { workers: 0, ..base.clone() }.validate().is_err());
        assert!(AgentConfig { total_env_steps: 100, ..base }.validate().is_err());
    }
}
