//! Intrinsic rewards from episodic visitation discrepancy.
//!
//! The crate estimates the Rényi divergence between the state-visitation
//! samples of consecutive episodes with a k-nearest-neighbor estimator, turns
//! it into per-transition exploration bonuses, and wires those bonuses into a
//! small PPO/A2C stack with toy sparse-reward environments.

// Range checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod divergence;
pub mod encoder;
pub mod envs;
pub mod error;
pub mod harness;
pub mod nets;
pub mod numerics;
pub mod rewards;

pub use error::{Error, Result};
