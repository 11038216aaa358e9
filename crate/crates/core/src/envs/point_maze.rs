use serde::{Deserialize, Serialize};

use super::{ActionSpace, Environment, Step};
use crate::error::{Error, Result};
use crate::nets::Action;
use crate::numerics::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointReward {
    /// `-‖x − goal‖` every step.
    Dense,
    /// `goal_reward` on entering the goal ball, zero otherwise.
    #[default]
    Sparse,
}

/// Point mass in `[-1, 1]^dim` driven by clipped velocity commands:
/// `x ← clip(x + clip(a, ±a_max)·dt, ±1)`.
///
/// Starts near `(-0.8, …)` (uniform jitter of ±0.05 from the env's own stream)
/// with the goal at `(0.8, …)`. Entering the goal ball terminates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMaze {
    dim: usize,
    goal: Vec<f64>,
    goal_radius: f64,
    goal_reward: f64,
    a_max: f64,
    dt: f64,
    max_steps: usize,
    reward: PointReward,
    rng: RngStream,
    pos: Vec<f64>,
    steps: usize,
    done: bool,
}

impl PointMaze {
    pub fn new(dim: usize, goal_radius: f64, max_steps: usize, reward: PointReward, seed: u64) -> Result<Self> {
        Self::with_dynamics(dim, goal_radius, max_steps, reward, 1.0, 0.1, seed)
    }

    pub fn with_dynamics(
        dim: usize,
        goal_radius: f64,
        max_steps: usize,
        reward: PointReward,
        a_max: f64,
        dt: f64,
        seed: u64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("point maze dimension must be >= 1"));
        }
        if !(goal_radius > 0.0) || !(a_max > 0.0) || !(dt > 0.0) {
            return Err(Error::param("goal_radius, a_max and dt must be positive"));
        }
        if max_steps == 0 {
            return Err(Error::param("max_steps must be >= 1"));
        }
        let mut env = Self {
            dim,
            goal: vec![0.8; dim],
            goal_radius,
            goal_reward: 1.0,
            a_max,
            dt,
            max_steps,
            reward,
            rng: RngStream::new(seed),
            pos: vec![0.0; dim],
            steps: 0,
            done: false,
        };
        env.reset();
        Ok(env)
    }

    pub fn position(&self) -> &[f64] {
        &self.pos
    }

    pub fn goal(&self) -> &[f64] {
        &self.goal
    }

    pub fn goal_radius(&self) -> f64 {
        self.goal_radius
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn distance_to_goal(&self) -> f64 {
        self.pos.iter().zip(&self.goal).map(|(x, g)| (x - g) * (x - g)).sum::<f64>().sqrt()
    }
}

impl Environment for PointMaze {
    fn observation_dim(&self) -> usize {
        self.dim
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Box { dim: self.dim, low: -self.a_max, high: self.a_max }
    }

    fn reset(&mut self) -> Vec<f64> {
        for x in self.pos.iter_mut() {
            *x = -0.8 + self.rng.uniform(-0.05, 0.05);
        }
        self.steps = 0;
        self.done = false;
        self.pos.clone()
    }

    fn step(&mut self, action: &Action) -> Result<Step> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        let a = match action {
            Action::Continuous(a) if a.len() == self.dim => a,
            other => return Err(Error::InvalidAction(format!("point maze expects {} reals, got {other:?}", self.dim))),
        };
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidAction("non-finite action".into()));
        }
        for (x, v) in self.pos.iter_mut().zip(a) {
            *x = (*x + v.clamp(-self.a_max, self.a_max) * self.dt).clamp(-1.0, 1.0);
        }
        self.steps += 1;
        let dist = self.distance_to_goal();
        let success = dist <= self.goal_radius;
        let truncated = !success && self.steps >= self.max_steps;
        self.done = success || truncated;
        let reward = match self.reward {
            PointReward::Dense => -dist,
            PointReward::Sparse if success => self.goal_reward,
            PointReward::Sparse => 0.0,
        };
        Ok(Step { observation: self.pos.clone(), reward, terminated: success, truncated, success })
    }
}
