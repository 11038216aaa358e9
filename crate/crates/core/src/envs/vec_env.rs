use serde::{Deserialize, Serialize};

use super::{Environment, Step};
use crate::error::{Error, Result};
use crate::nets::Action;

/// One worker's transition from a synchronous vector step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VecStep {
    /// Observation the worker will act on next (the reset observation after a done).
    pub observation: Vec<f64>,
    /// True successor state of this transition, before any auto-reset.
    pub next_state: Vec<f64>,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub success: bool,
    /// Undiscounted return of the episode that ended on this step, if any.
    pub episode_return: Option<f64>,
}

/// N independent environments stepped in lockstep with automatic reset.
/// Results are always gathered in worker order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VecEnv<E> {
    envs: Vec<E>,
    observations: Vec<Vec<f64>>,
    running_returns: Vec<f64>,
}

impl<E: Environment> VecEnv<E> {
    pub fn new(mut envs: Vec<E>) -> Result<Self> {
        if envs.is_empty() {
            return Err(Error::param("a vectorized environment needs at least one worker"));
        }
        let dim = envs[0].observation_dim();
        let space = envs[0].action_space();
        if envs.iter().any(|e| e.observation_dim() != dim || e.action_space() != space) {
            return Err(Error::param("all workers must share observation and action spaces"));
        }
        let observations = envs.iter_mut().map(|e| e.reset()).collect();
        let running_returns = vec![0.0; envs.len()];
        Ok(Self { envs, observations, running_returns })
    }

    pub fn num_workers(&self) -> usize {
        self.envs.len()
    }

    pub fn observation_dim(&self) -> usize {
        self.envs[0].observation_dim()
    }

    pub fn action_space(&self) -> super::ActionSpace {
        self.envs[0].action_space()
    }

    pub fn observations(&self) -> &[Vec<f64>] {
        &self.observations
    }

    pub fn envs(&self) -> &[E] {
        &self.envs
    }

    pub fn step(&mut self, actions: &[Action]) -> Result<Vec<VecStep>> {
        if actions.len() != self.envs.len() {
            return Err(Error::DimensionMismatch { expected: self.envs.len(), found: actions.len() });
        }
        let mut out = Vec::with_capacity(self.envs.len());
        for (w, (env, action)) in self.envs.iter_mut().zip(actions).enumerate() {
            let Step { observation, reward, terminated, truncated, success } = env
                .step(action)
                .map_err(|e| Error::Environment { worker: w, detail: e.to_string() })?;
            self.running_returns[w] += reward;
            let done = terminated || truncated;
            let episode_return = done.then(|| std::mem::take(&mut self.running_returns[w]));
            let next_obs = if done { env.reset() } else { observation.clone() };
            self.observations[w] = next_obs.clone();
            out.push(VecStep {
                observation: next_obs,
                next_state: observation,
                reward,
                terminated,
                truncated,
                success,
                episode_return,
            });
        }
        Ok(out)
    }
}
