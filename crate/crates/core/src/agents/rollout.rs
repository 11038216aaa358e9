use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::ActorCritic;
use crate::envs::{Environment, VecEnv};
use crate::error::{Error, Result};
use crate::nets::{Action, Actions};
use crate::numerics::RngStream;

/// One worker's share of a rollout, `T` rows each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerTrajectory {
    /// State acted on at each step.
    pub states: Array2<f64>,
    /// True successor of each step, before any auto-reset.
    pub next_states: Array2<f64>,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub logprobs: Vec<f64>,
    pub terminated: Vec<bool>,
    pub truncated: Vec<bool>,
    pub successes: Vec<bool>,
    /// Value of the successor on truncated steps, zero elsewhere.
    pub truncation_values: Vec<f64>,
    /// Returns of episodes that finished inside this segment.
    pub episode_returns: Vec<f64>,
    /// Value of the observation following the last step.
    pub bootstrap: f64,
}

impl WorkerTrajectory {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn dones(&self) -> Vec<bool> {
        self.terminated.iter().zip(&self.truncated).map(|(a, b)| *a || *b).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rollout {
    pub workers: Vec<WorkerTrajectory>,
}

impl Rollout {
    pub fn transitions(&self) -> usize {
        self.workers.iter().map(|w| w.len()).sum()
    }
}

/// Steps every worker `steps` times under the current stochastic policy.
/// Actions are sampled in worker order from `rng`.
pub fn collect_rollout<E: Environment>(ac: &ActorCritic, envs: &mut VecEnv<E>, steps: usize, rng: &mut RngStream) -> Result<Rollout> {
    if steps == 0 {
        return Err(Error::param("rollout length must be >= 1"));
    }
    let nw = envs.num_workers();
    let obs_dim = envs.observation_dim();
    let mut workers: Vec<WorkerTrajectory> = (0..nw)
        .map(|_| WorkerTrajectory {
            states: Array2::zeros((steps, obs_dim)),
            next_states: Array2::zeros((steps, obs_dim)),
            actions: Vec::with_capacity(steps),
            rewards: Vec::with_capacity(steps),
            values: Vec::with_capacity(steps),
            logprobs: Vec::with_capacity(steps),
            terminated: Vec::with_capacity(steps),
            truncated: Vec::with_capacity(steps),
            successes: Vec::with_capacity(steps),
            truncation_values: Vec::with_capacity(steps),
            episode_returns: Vec::new(),
            bootstrap: 0.0,
        })
        .collect();
    let to_matrix = |rows: &[Vec<f64>]| {
        Array2::from_shape_fn((rows.len(), obs_dim), |(i, j)| rows[i][j])
    };
    for t in 0..steps {
        let obs = to_matrix(envs.observations());
        let out = ac.policy.forward(obs.view())?;
        let values = ac.values(obs.view())?;
        let actions: Vec<Action> = out.rows().into_iter().map(|row| ac.head.sample(row, rng)).collect();
        let logprobs = match &actions[0] {
            Action::Discrete(_) => {
                let idx: Vec<usize> = actions.iter().map(|a| if let Action::Discrete(i) = a { *i } else { 0 }).collect();
                ac.head.logprob_entropy(out.view(), Actions::Discrete(&idx))?.logprob
            }
            Action::Continuous(_) => {
                let m = super::BatchActions::from_actions(&actions)?;
                ac.head.logprob_entropy(out.view(), m.view())?.logprob
            }
        };
        let results = envs.step(&actions)?;
        let truncated_rows: Vec<usize> = (0..nw).filter(|&w| results[w].truncated && !results[w].terminated).collect();
        let truncation_values = if truncated_rows.is_empty() {
            vec![0.0; nw]
        } else {
            let succ = to_matrix(&results.iter().map(|r| r.next_state.clone()).collect::<Vec<_>>());
            let v = ac.values(succ.view())?;
            (0..nw).map(|w| if truncated_rows.contains(&w) { v[w] } else { 0.0 }).collect()
        };
        for (w, (traj, res)) in workers.iter_mut().zip(results).enumerate() {
            if !res.reward.is_finite() {
                return Err(Error::Environment { worker: w, detail: format!("non-finite reward {}", res.reward) });
            }
            traj.states.row_mut(t).assign(&obs.row(w));
            traj.next_states.row_mut(t).iter_mut().zip(&res.next_state).for_each(|(d, s)| *d = *s);
            traj.actions.push(actions[w].clone());
            traj.rewards.push(res.reward);
            traj.values.push(values[w]);
            traj.logprobs.push(logprobs[w]);
            traj.terminated.push(res.terminated);
            traj.truncated.push(res.truncated);
            traj.successes.push(res.success);
            traj.truncation_values.push(truncation_values[w]);
            if let Some(r) = res.episode_return {
                traj.episode_returns.push(r);
            }
        }
    }
    let last = ac.values(to_matrix(envs.observations()).view())?;
    for (traj, v) in workers.iter_mut().zip(last) {
        traj.bootstrap = v;
    }
    Ok(Rollout { workers })
}
