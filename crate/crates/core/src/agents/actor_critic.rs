use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::envs::ActionSpace;
use crate::error::{Error, Result};
use crate::nets::{adam_step, clip_grad_norm, Action, Actions, Activation, AdamConfig, AdamState, PolicyHead, SmallNet};

/// Policy network with its action head plus a separate value network, each
/// with its own Adam moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorCritic {
    pub policy: SmallNet,
    pub head: PolicyHead,
    pub value: SmallNet,
    policy_opt: AdamState,
    head_opt: AdamState,
    value_opt: AdamState,
}

/// Gradients for every trainable block, laid out like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCriticGrads {
    pub policy: Vec<f64>,
    pub head: Vec<f64>,
    pub value: Vec<f64>,
}

impl ActorCriticGrads {
    pub fn is_finite(&self) -> bool {
        self.policy.iter().chain(&self.head).chain(&self.value).all(|g| g.is_finite())
    }
}

impl ActorCritic {
    /// Tanh MLPs `obs → hidden.. → out`. The last policy layer is scaled by
    /// 0.01 so the initial policy is close to uniform.
    pub fn new(obs_dim: usize, space: &ActionSpace, hidden: &[usize], lr: f64, policy_seed: u64, value_seed: u64) -> Result<Self> {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        let out_dim = space.policy_output_dim();
        let mut policy_sizes = sizes.clone();
        policy_sizes.push(out_dim);
        let mut policy = SmallNet::mlp(&policy_sizes, Activation::Tanh, Activation::Identity, policy_seed)?;
        let last_in = *sizes.last().expect("obs dim present");
        let n = policy.num_params();
        let start = n - out_dim - out_dim * last_in;
        for w in &mut policy.params_mut()[start..n - out_dim] {
            *w *= 0.01;
        }
        sizes.push(1);
        let value = SmallNet::mlp(&sizes, Activation::Tanh, Activation::Identity, value_seed)?;
        let head = match space {
            ActionSpace::Discrete(n) => PolicyHead::Categorical { actions: *n },
            ActionSpace::Box { dim, .. } => PolicyHead::gaussian(*dim),
        };
        let cfg = AdamConfig { lr, ..AdamConfig::default() };
        Ok(Self {
            policy_opt: AdamState::new(policy.num_params(), cfg),
            head_opt: AdamState::new(head.params().len(), cfg),
            value_opt: AdamState::new(value.num_params(), cfg),
            policy,
            head,
            value,
        })
    }

    pub fn values(&self, obs: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        Ok(self.value.forward(obs)?.column(0).to_vec())
    }

    /// Joint norm clip over all blocks, then one Adam step per block.
    /// Returns the pre-clip gradient norm.
    pub fn apply(&mut self, mut grads: ActorCriticGrads, max_grad_norm: f64) -> Result<f64> {
        if !grads.is_finite() {
            return Err(Error::NonFinite("gradient"));
        }
        let norm = clip_grad_norm(&mut [&mut grads.policy, &mut grads.head, &mut grads.value], max_grad_norm);
        adam_step(self.policy.params_mut(), &grads.policy, &mut self.policy_opt)?;
        if !grads.head.is_empty() {
            adam_step(self.head.params_mut(), &grads.head, &mut self.head_opt)?;
        }
        adam_step(self.value.params_mut(), &grads.value, &mut self.value_opt)?;
        Ok(norm)
    }
}

/// Flattened training samples, all aligned by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub obs: Array2<f64>,
    pub actions: BatchActions,
    pub old_logprobs: Vec<f64>,
    pub old_values: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BatchActions {
    Discrete(Vec<usize>),
    Continuous(Array2<f64>),
}

impl BatchActions {
    pub fn from_actions(actions: &[Action]) -> Result<Self> {
        match actions.first() {
            None | Some(Action::Discrete(_)) => actions
                .iter()
                .map(|a| match a {
                    Action::Discrete(i) => Ok(*i),
                    Action::Continuous(_) => Err(Error::InvalidAction("mixed action kinds".into())),
                })
                .collect::<Result<_>>()
                .map(BatchActions::Discrete),
            Some(Action::Continuous(first)) => {
                let mut m = Array2::zeros((actions.len(), first.len()));
                for (i, a) in actions.iter().enumerate() {
                    match a {
                        Action::Continuous(v) if v.len() == first.len() => {
                            m.row_mut(i).iter_mut().zip(v).for_each(|(d, s)| *d = *s);
                        }
                        _ => return Err(Error::InvalidAction("mixed action kinds or widths".into())),
                    }
                }
                Ok(BatchActions::Continuous(m))
            }
        }
    }

    pub fn view(&self) -> Actions<'_> {
        match self {
            BatchActions::Discrete(a) => Actions::Discrete(a),
            BatchActions::Continuous(a) => Actions::Continuous(a.view()),
        }
    }

    fn select(&self, idx: &[usize]) -> Self {
        match self {
            BatchActions::Discrete(a) => BatchActions::Discrete(idx.iter().map(|&i| a[i]).collect()),
            BatchActions::Continuous(a) => BatchActions::Continuous(a.select(ndarray::Axis(0), idx)),
        }
    }
}

impl Batch {
    pub fn len(&self) -> usize {
        self.advantages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.advantages.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self {
            obs: self.obs.select(ndarray::Axis(0), idx),
            actions: self.actions.select(idx),
            old_logprobs: pick(&self.old_logprobs),
            old_values: pick(&self.old_values),
            advantages: pick(&self.advantages),
            returns: pick(&self.returns),
        }
    }
}

/// Loss terms for one gradient step. `policy_loss` excludes the entropy bonus;
/// `value_loss` is before the value coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossMetrics {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
}

impl LossMetrics {
    pub fn is_finite(&self) -> bool {
        self.policy_loss.is_finite() && self.value_loss.is_finite() && self.entropy.is_finite()
    }
}

/// Settings shared by both surrogate losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSettings {
    /// Ratio clip; `None` gives the plain policy-gradient surrogate.
    pub clip: Option<f64>,
    pub value_clip: Option<f64>,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub normalize_advantages: bool,
}

fn normalized(adv: &[f64]) -> Vec<f64> {
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    if adv.len() < 2 {
        return adv.iter().map(|a| a - mean).collect();
    }
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
    adv.iter().map(|a| (a - mean) / (var.sqrt() + 1e-8)).collect()
}

/// Loss value and exact gradients for one batch.
///
/// With a ratio clip the policy term is `−mean(min(ρA, clip(ρ, 1±c)A))`, with
/// `ρ = exp(logπ − logπ_old)`; without one it is `−mean(logπ·A)`. The value
/// term is `mean(max((V−R)², (V_old + clip(V−V_old, ±c_v) − R)²))` or the plain
/// squared error, and the entropy bonus enters as `−entropy_coef·mean(H)`.
pub fn loss_and_grads(ac: &mut ActorCritic, batch: &Batch, s: &LossSettings) -> Result<(LossMetrics, ActorCriticGrads)> {
    let n = batch.len();
    if n == 0 {
        return Err(Error::InsufficientSamples { needed: 1, available: 0 });
    }
    let nf = n as f64;
    let adv = if s.normalize_advantages { normalized(&batch.advantages) } else { batch.advantages.clone() };

    let out = ac.policy.forward_train(batch.obs.view())?;
    let eval = ac.head.logprob_entropy(out.view(), batch.actions.view())?;
    let mut d_logprob = vec![0.0; n];
    let mut policy_loss = 0.0;
    let mut clipped = 0usize;
    for i in 0..n {
        match s.clip {
            Some(c) => {
                let ratio = (eval.logprob[i] - batch.old_logprobs[i]).exp();
                let unclipped = ratio * adv[i];
                let bounded = ratio.clamp(1.0 - c, 1.0 + c) * adv[i];
                if unclipped <= bounded {
                    policy_loss -= unclipped;
                    d_logprob[i] = -adv[i] * ratio / nf;
                } else {
                    policy_loss -= bounded;
                }
                if (ratio - 1.0).abs() > c {
                    clipped += 1;
                }
            }
            None => {
                policy_loss -= eval.logprob[i] * adv[i];
                d_logprob[i] = -adv[i] / nf;
            }
        }
    }
    policy_loss /= nf;
    let entropy = eval.entropy.iter().sum::<f64>() / nf;
    let d_entropy = vec![-s.entropy_coef / nf; n];
    let (d_out, head_grads) = ac.head.backward(out.view(), batch.actions.view(), &d_logprob, &d_entropy)?;
    let policy_grads = ac.policy.backward(d_out.view())?.params;

    let v = ac.value.forward_train(batch.obs.view())?;
    let mut d_v = Array2::zeros((n, 1));
    let mut value_loss = 0.0;
    for i in 0..n {
        let vi = v[[i, 0]];
        let u = vi - batch.returns[i];
        let (loss, grad) = match s.value_clip {
            Some(c) => {
                let delta = vi - batch.old_values[i];
                let w = batch.old_values[i] + delta.clamp(-c, c) - batch.returns[i];
                if u * u >= w * w {
                    (u * u, 2.0 * u)
                } else {
                    (w * w, if delta.abs() < c { 2.0 * w } else { 0.0 })
                }
            }
            None => (u * u, 2.0 * u),
        };
        value_loss += loss;
        d_v[[i, 0]] = s.value_coef * grad / nf;
    }
    value_loss /= nf;
    let value_grads = ac.value.backward(d_v.view())?.params;
    ac.policy.clear_cache();
    ac.value.clear_cache();

    Ok((
        LossMetrics { policy_loss, value_loss, entropy, clip_fraction: clipped as f64 / nf },
        ActorCriticGrads { policy: policy_grads, head: head_grads, value: value_grads },
    ))
}

/// Scalar objective matching [`loss_and_grads`], used for finite-difference checks.
pub fn total_loss(m: &LossMetrics, s: &LossSettings) -> f64 {
    m.policy_loss + s.value_coef * m.value_loss - s.entropy_coef * m.entropy
}
