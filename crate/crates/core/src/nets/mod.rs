//! Small feed-forward networks with exact reverse-mode gradients, policy
//! heads and an Adam optimizer. Policy, value function and the dynamics model
//! used by the impact-driven baseline are all [`SmallNet`]s; the frozen state
//! encoder reuses the same forward pass.

mod adam;
mod mlp;
mod policy;

pub use adam::{adam_step, clip_grad_norm, AdamConfig, AdamState};
pub use mlp::{scaled_uniform_bound, Activation, Gradients, LayerSpec, SmallNet};
pub use policy::{Action, Actions, HeadEval, PolicyHead};
