use serde::{Deserialize, Serialize};

use super::{ActionSpace, Environment, Step};
use crate::error::{Error, Result};
use crate::nets::Action;

/// Linear chain of `length` states. The agent starts at state 0; action 1
/// moves right, action 0 moves left. Reaching the last state pays
/// `goal_reward` and terminates. Observation is `position / (length − 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    length: usize,
    goal_reward: f64,
    max_steps: usize,
    pos: usize,
    steps: usize,
    done: bool,
}

impl Chain {
    pub fn new(length: usize, goal_reward: f64, max_steps: usize) -> Result<Self> {
        if length < 2 {
            return Err(Error::param(format!("chain length must be >= 2, got {length}")));
        }
        if max_steps == 0 {
            return Err(Error::param("max_steps must be >= 1"));
        }
        Ok(Self { length, goal_reward, max_steps, pos: 0, steps: 0, done: false })
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    fn observe(&self) -> Vec<f64> {
        vec![self.pos as f64 / (self.length - 1) as f64]
    }
}

impl Environment for Chain {
    fn observation_dim(&self) -> usize {
        1
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(2)
    }

    fn reset(&mut self) -> Vec<f64> {
        self.pos = 0;
        self.steps = 0;
        self.done = false;
        self.observe()
    }

    fn step(&mut self, action: &Action) -> Result<Step> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        match action {
            Action::Discrete(0) => self.pos = self.pos.saturating_sub(1),
            Action::Discrete(1) => self.pos = (self.pos + 1).min(self.length - 1),
            other => return Err(Error::InvalidAction(format!("chain expects 0 or 1, got {other:?}"))),
        }
        self.steps += 1;
        let success = self.pos == self.length - 1;
        let truncated = !success && self.steps >= self.max_steps;
        self.done = success || truncated;
        Ok(Step {
            observation: self.observe(),
            reward: if success { self.goal_reward } else { 0.0 },
            terminated: success,
            truncated,
            success,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walking_right_reaches_goal() {
        let mut env = Chain::new(5, 1.0, 100).unwrap();
        env.reset();
        for i in 0..4 {
            let s = env.step(&Action::Discrete(1)).unwrap();
            assert_eq!(s.terminated, i == 3);
            assert_eq!(s.reward, if i == 3 { 1.0 } else { 0.0 });
        }
        assert_eq!(env.position(), 4);
    }

    #[test]
    fn left_edge_is_sticky() {
        let mut env = Chain::new(5, 1.0, 100).unwrap();
        env.reset();
        let s = env.step(&Action::Discrete(0)).unwrap();
        assert_eq!(s.observation, vec![0.0]);
        assert!(Chain::new(1, 1.0, 10).is_err());
    }
}
