use crate::error::{Error, Result};

/// GAE(λ) over one worker's sequence. `dones[t]` cuts the recursion after
/// step `t`; `bootstrap` is the value of the state following the last step.
/// Returns `(advantages, advantages + values)`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    gae_lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rewards.len();
    if values.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: values.len() });
    }
    if dones.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: dones.len() });
    }
    let mut advantages = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let (next_value, carry) = if dones[t] {
            (0.0, 0.0)
        } else if t + 1 < n {
            (values[t + 1], running)
        } else {
            (bootstrap, 0.0)
        };
        let delta = rewards[t] + gamma * next_value - values[t];
        running = delta + gamma * gae_lambda * carry;
        advantages[t] = running;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((advantages, returns))
}
