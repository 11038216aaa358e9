use serde::{Deserialize, Serialize};

use super::{ActionSpace, Environment, Step};
use crate::error::{Error, Result};
use crate::nets::Action;
use crate::numerics::RngStream;

/// `sign(r)` with `sign(0) = 0`.
pub fn sign(r: f64) -> f64 {
    if r > 0.0 {
        1.0
    } else if r < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Replaces the extrinsic reward by its sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignClip<E> {
    inner: E,
}

pub fn reward_clip_sign<E: Environment>(env: E) -> SignClip<E> {
    SignClip { inner: env }
}

impl<E> SignClip<E> {
    pub fn inner(&self) -> &E {
        &self.inner
    }
}

impl<E: Environment> Environment for SignClip<E> {
    fn observation_dim(&self) -> usize {
        self.inner.observation_dim()
    }

    fn action_space(&self) -> ActionSpace {
        self.inner.action_space()
    }

    fn reset(&mut self) -> Vec<f64> {
        self.inner.reset()
    }

    fn step(&mut self, action: &Action) -> Result<Step> {
        let mut s = self.inner.step(action)?;
        s.reward = sign(s.reward);
        Ok(s)
    }
}

/// Independently zeroes each step's extrinsic reward with a fixed probability.
///
/// The mask is drawn from a dedicated stream once per step, so masking never
/// perturbs the wrapped dynamics or any policy randomness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sparsify<E> {
    inner: E,
    zero_probability: f64,
    rng: RngStream,
}

pub(super) fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("zero_probability must lie in [0, 1], got {p}")));
    }
    Ok(())
}

pub fn sparsify<E: Environment>(env: E, zero_probability: f64, seed: u64) -> Result<Sparsify<E>> {
    check_probability(zero_probability)?;
    Ok(Sparsify { inner: env, zero_probability, rng: RngStream::new(seed) })
}

impl<E> Sparsify<E> {
    pub fn inner(&self) -> &E {
        &self.inner
    }
}

impl<E: Environment> Environment for Sparsify<E> {
    fn observation_dim(&self) -> usize {
        self.inner.observation_dim()
    }

    fn action_space(&self) -> ActionSpace {
        self.inner.action_space()
    }

    fn reset(&mut self) -> Vec<f64> {
        self.inner.reset()
    }

    fn step(&mut self, action: &Action) -> Result<Step> {
        let mut s = self.inner.step(action)?;
        if self.rng.bernoulli(self.zero_probability) {
            s.reward = 0.0;
        }
        Ok(s)
    }
}
