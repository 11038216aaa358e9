use std::collections::VecDeque;
use std::path::Path;

use ndarray::Array2;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{
    collect_rollout, compute_gae, loss_and_grads, ActorCritic, AgentConfig, Algo, Batch, BatchActions, LossMetrics,
    LossSettings, Rollout, RunRecord,
};
use crate::divergence::episodic_discrepancy;
use crate::encoder::{EpisodeEmbeddings, FixedEncoder};
use crate::envs::{EnvSpec, EnvStack, Environment, VecEnv};
use crate::error::{Error, Result};
use crate::nets::{AdamConfig, AdamState, SmallNet};
use crate::numerics::RngStream;
use crate::rewards::{
    decay_lambda, dynamics_model, dynamics_update, median_nn_distance, mix_rewards, re3_rewards, revd_rewards,
    ride_rewards, scaling_coefficient, DecayMode, RewardConfig, RewardVariant,
};

const RETURN_WINDOW: usize = 100;
const DYNAMICS_HIDDEN: usize = 64;

/// Stream ids used to derive the independent random streams of one run.
pub mod streams {
    pub const POLICY_INIT: u64 = 1;
    pub const VALUE_INIT: u64 = 2;
    pub const ENCODER_INIT: u64 = 3;
    pub const ACTION_SAMPLING: u64 = 4;
    pub const MINIBATCH_SHUFFLE: u64 = 5;
    pub const DYNAMICS_INIT: u64 = 6;
    pub const ENV_BASE: u64 = 100;
    pub const REWARD_MASK_BASE: u64 = 200;
}

/// Seed for the component identified by `stream` within run `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    RngStream::with_stream(seed, stream).next_u64()
}

/// Builds one wrapped environment per worker with per-worker seeds.
pub fn build_vec_env(spec: &EnvSpec, workers: usize, seed: u64) -> Result<VecEnv<EnvStack>> {
    let envs = (0..workers as u64)
        .map(|w| {
            spec.build(
                derive_seed(seed, streams::ENV_BASE + w),
                derive_seed(seed, streams::REWARD_MASK_BASE + w),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    VecEnv::new(envs)
}

/// Current and previous episode embeddings of one worker.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WorkerMemory {
    pub current: Option<EpisodeEmbeddings>,
    pub previous: Option<EpisodeEmbeddings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Dynamics {
    model: SmallNet,
    opt: AdamState,
}

/// Everything one update produced, for inspection by tests and tooling.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateTrace {
    pub record: RunRecord,
    /// Unweighted intrinsic rewards per worker.
    pub intrinsic: Vec<Vec<f64>>,
    /// Embeddings of the segment each worker just collected.
    pub embeddings: Vec<EpisodeEmbeddings>,
    pub rollout: Rollout,
}

/// On-policy trainer: collect, encode, reward, mix, update, swap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trainer<E> {
    agent: AgentConfig,
    reward: RewardConfig,
    seed: u64,
    ac: ActorCritic,
    encoder: FixedEncoder,
    envs: VecEnv<E>,
    sampling_rng: RngStream,
    shuffle_rng: RngStream,
    memory: Vec<WorkerMemory>,
    dynamics: Option<Dynamics>,
    ride_radius: Option<f64>,
    update_index: u64,
    env_steps: u64,
    recent_returns: VecDeque<f64>,
    episodes_completed: u64,
    successes: u64,
    skipped_updates: u64,
}

impl<E: Environment> Trainer<E> {
    pub fn new(envs: VecEnv<E>, agent: AgentConfig, reward: RewardConfig, seed: u64) -> Result<Self> {
        agent.validate()?;
        reward.validate()?;
        if envs.num_workers() != agent.workers {
            return Err(Error::Config(format!("{} environments for {} workers", envs.num_workers(), agent.workers)));
        }
        if agent.steps_per_episode < reward.k + 1 {
            return Err(Error::Config(format!(
                "steps_per_episode {} must exceed k = {} for the neighbor searches",
                agent.steps_per_episode, reward.k
            )));
        }
        let space = envs.action_space();
        let obs_dim = envs.observation_dim();
        let ac = ActorCritic::new(
            obs_dim,
            &space,
            &agent.hidden,
            agent.learning_rate,
            derive_seed(seed, streams::POLICY_INIT),
            derive_seed(seed, streams::VALUE_INIT),
        )?;
        let encoder = FixedEncoder::new(obs_dim, reward.embed_dim, &reward.encoder_hidden, derive_seed(seed, streams::ENCODER_INIT))?;
        let dynamics = if reward.variant == RewardVariant::Ride {
            let model = dynamics_model(reward.embed_dim, space.policy_output_dim(), DYNAMICS_HIDDEN, derive_seed(seed, streams::DYNAMICS_INIT))?;
            let opt = AdamState::new(model.num_params(), AdamConfig { lr: agent.learning_rate, ..AdamConfig::default() });
            Some(Dynamics { model, opt })
        } else {
            None
        };
        Ok(Self {
            memory: vec![WorkerMemory::default(); agent.workers],
            ride_radius: reward.ride_radius,
            agent,
            reward,
            seed,
            ac,
            encoder,
            envs,
            sampling_rng: RngStream::with_stream(seed, streams::ACTION_SAMPLING),
            shuffle_rng: RngStream::with_stream(seed, streams::MINIBATCH_SHUFFLE),
            dynamics,
            update_index: 0,
            env_steps: 0,
            recent_returns: VecDeque::with_capacity(RETURN_WINDOW),
            episodes_completed: 0,
            successes: 0,
            skipped_updates: 0,
        })
    }

    pub fn agent_config(&self) -> &AgentConfig {
        &self.agent
    }

    pub fn reward_config(&self) -> &RewardConfig {
        &self.reward
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn actor_critic(&self) -> &ActorCritic {
        &self.ac
    }

    pub fn encoder(&self) -> &FixedEncoder {
        &self.encoder
    }

    pub fn memory(&self) -> &[WorkerMemory] {
        &self.memory
    }

    pub fn update_index(&self) -> u64 {
        self.update_index
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn ride_radius(&self) -> Option<f64> {
        self.ride_radius
    }

    pub fn is_finished(&self) -> bool {
        self.update_index >= self.agent.num_updates()
    }

    /// Intrinsic weight of the first transition of the coming update.
    pub fn current_lambda(&self) -> f64 {
        if self.reward.variant == RewardVariant::None {
            0.0
        } else {
            decay_lambda(self.reward.lambda0, self.reward.kappa, self.decay_index())
        }
    }

    /// Decay index of the first transition of the coming update.
    fn decay_index(&self) -> u64 {
        match self.reward.decay_mode {
            DecayMode::PerEpisode => self.update_index,
            DecayMode::PerStep => self.update_index * self.agent.steps_per_episode as u64,
        }
    }

    /// One full iteration; errors carry the update index.
    pub fn update(&mut self) -> Result<UpdateTrace> {
        let index = self.update_index;
        self.update_inner().map_err(|e| Error::Training { update: index as usize, source: Box::new(e) })
    }

    fn update_inner(&mut self) -> Result<UpdateTrace> {
        let steps = self.agent.steps_per_episode;
        let rollout = collect_rollout(&self.ac, &mut self.envs, steps, &mut self.sampling_rng)?;
        let nw = rollout.workers.len();

        let mut embeddings = Vec::with_capacity(nw);
        for (w, traj) in rollout.workers.iter().enumerate() {
            let e = self.encoder.encode_episode(traj.states.view(), self.update_index as usize, w)?;
            self.memory[w].current = Some(e.clone());
            embeddings.push(e);
        }

        let params = self.reward.divergence_params()?;
        let mut scaling = 0.0;
        let mut d_hat = 0.0;
        for (w, e) in embeddings.iter().enumerate() {
            scaling += scaling_coefficient(e)?;
            if let Some(prev) = &self.memory[w].previous {
                d_hat += episodic_discrepancy(e, prev, &params)?.d_hat;
            }
        }
        scaling /= nw as f64;
        d_hat /= nw as f64;

        let (intrinsic, dynamics_loss) = self.intrinsic_rewards(&rollout, &embeddings)?;

        let mut totals = Vec::with_capacity(nw);
        let mut weighted = Vec::with_capacity(nw * steps);
        for (traj, bonus) in rollout.workers.iter().zip(&intrinsic) {
            let mixed = if self.reward.variant == RewardVariant::None {
                traj.rewards.clone()
            } else {
                mix_rewards(&traj.rewards, bonus, &self.reward, self.decay_index())?
            };
            weighted.extend(mixed.iter().zip(&traj.rewards).map(|(m, r)| m - r));
            totals.push(mixed);
        }

        let batch = self.build_batch(&rollout, &totals)?;
        let metrics = match self.agent.algo {
            Algo::Ppo => self.ppo_update(&batch)?,
            Algo::A2c => self.a2c_update(&batch)?,
        };

        for m in &mut self.memory {
            m.previous = m.current.take();
        }
        for traj in &rollout.workers {
            for &r in &traj.episode_returns {
                if self.recent_returns.len() == RETURN_WINDOW {
                    self.recent_returns.pop_front();
                }
                self.recent_returns.push_back(r);
                self.episodes_completed += 1;
            }
            self.successes += traj.successes.iter().filter(|&&s| s).count() as u64;
        }
        self.env_steps += rollout.transitions() as u64;

        let mean_return = if self.recent_returns.is_empty() {
            0.0
        } else {
            self.recent_returns.iter().sum::<f64>() / self.recent_returns.len() as f64
        };
        let record = RunRecord {
            update: self.update_index,
            env_steps: self.env_steps,
            mean_episode_return: mean_return,
            episodes_completed: self.episodes_completed,
            successes: self.successes,
            intrinsic_mean: weighted.iter().sum::<f64>() / weighted.len() as f64,
            intrinsic_max: weighted.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            scaling_l: scaling,
            lambda: self.current_lambda(),
            d_hat,
            policy_loss: metrics.policy_loss,
            value_loss: metrics.value_loss,
            entropy: metrics.entropy,
            dynamics_loss,
            skipped_updates: self.skipped_updates,
        };
        self.update_index += 1;
        Ok(UpdateTrace { record, intrinsic, embeddings, rollout })
    }

    /// Unweighted per-worker bonuses plus the mean dynamics-model loss.
    fn intrinsic_rewards(&mut self, rollout: &Rollout, embeddings: &[EpisodeEmbeddings]) -> Result<(Vec<Vec<f64>>, f64)> {
        let steps = self.agent.steps_per_episode;
        let zeros = || vec![vec![0.0; steps]; embeddings.len()];
        match self.reward.variant {
            RewardVariant::None => Ok((zeros(), 0.0)),
            RewardVariant::Revd => {
                if self.memory.iter().any(|m| m.previous.is_none()) {
                    return Ok((zeros(), 0.0));
                }
                let out = embeddings
                    .iter()
                    .zip(&self.memory)
                    .map(|(e, m)| Ok(revd_rewards(e, m.previous.as_ref().expect("checked"), &self.reward)?.rewards))
                    .collect::<Result<_>>()?;
                Ok((out, 0.0))
            }
            RewardVariant::Re3 | RewardVariant::Re3Log => {
                let log = self.reward.variant == RewardVariant::Re3Log;
                let out = embeddings.iter().map(|e| re3_rewards(e, self.reward.k, log)).collect::<Result<_>>()?;
                Ok((out, 0.0))
            }
            RewardVariant::Ride => {
                let radius = match self.ride_radius {
                    Some(r) => r,
                    None => {
                        let r = median_nn_distance(&embeddings.iter().collect::<Vec<_>>())?;
                        self.ride_radius = Some(r);
                        r
                    }
                };
                let space = self.envs.action_space();
                let dynamics = self.dynamics.as_mut().expect("created for this variant");
                let mut out = Vec::with_capacity(embeddings.len());
                let mut loss = 0.0;
                for (traj, e) in rollout.workers.iter().zip(embeddings) {
                    let next = EpisodeEmbeddings::new(self.encoder.encode(traj.next_states.view())?, e.episode_index, e.worker_id)?;
                    out.push(ride_rewards(e, &next, radius)?);
                    let a_dim = space.policy_output_dim();
                    let mut actions = Array2::zeros((traj.len(), a_dim));
                    for (i, a) in traj.actions.iter().enumerate() {
                        actions.row_mut(i).iter_mut().zip(space.encode_action(a)).for_each(|(d, s)| *d = s);
                    }
                    loss += dynamics_update(&mut dynamics.model, &mut dynamics.opt, e.view(), actions.view(), next.view())?;
                }
                Ok((out, loss / embeddings.len() as f64))
            }
        }
    }

    fn build_batch(&self, rollout: &Rollout, totals: &[Vec<f64>]) -> Result<Batch> {
        let n = rollout.transitions();
        let obs_dim = self.envs.observation_dim();
        let mut obs = Array2::zeros((n, obs_dim));
        let mut actions = Vec::with_capacity(n);
        let mut old_logprobs = Vec::with_capacity(n);
        let mut old_values = Vec::with_capacity(n);
        let mut advantages = Vec::with_capacity(n);
        let mut returns = Vec::with_capacity(n);
        let mut row = 0;
        for (traj, total) in rollout.workers.iter().zip(totals) {
            let rewards: Vec<f64> = total
                .iter()
                .zip(&traj.truncation_values)
                .map(|(r, v)| r + self.agent.gamma * v)
                .collect();
            let (adv, ret) = compute_gae(&rewards, &traj.values, &traj.dones(), traj.bootstrap, self.agent.gamma, self.agent.gae_lambda)?;
            for t in 0..traj.len() {
                obs.row_mut(row).assign(&traj.states.row(t));
                row += 1;
            }
            actions.extend(traj.actions.iter().cloned());
            old_logprobs.extend_from_slice(&traj.logprobs);
            old_values.extend_from_slice(&traj.values);
            advantages.extend(adv);
            returns.extend(ret);
        }
        if advantages.iter().chain(&returns).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("advantages"));
        }
        Ok(Batch { obs, actions: BatchActions::from_actions(&actions)?, old_logprobs, old_values, advantages, returns })
    }

    fn settings(&self, clip: Option<f64>) -> LossSettings {
        LossSettings {
            clip,
            value_clip: if clip.is_some() { self.agent.value_clip } else { None },
            entropy_coef: self.agent.entropy_coef,
            value_coef: self.agent.value_coef,
            normalize_advantages: self.agent.normalize_advantages,
        }
    }

    /// Computes gradients and applies them, or counts a skip when anything is non-finite.
    fn gradient_step(&mut self, batch: &Batch, settings: &LossSettings) -> Result<Option<LossMetrics>> {
        let (metrics, grads) = loss_and_grads(&mut self.ac, batch, settings)?;
        if !metrics.is_finite() || !grads.is_finite() {
            self.skipped_updates += 1;
            return Ok(None);
        }
        self.ac.apply(grads, self.agent.max_grad_norm)?;
        Ok(Some(metrics))
    }

    fn ppo_update(&mut self, batch: &Batch) -> Result<LossMetrics> {
        let settings = self.settings(Some(self.agent.clip));
        let n = batch.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut sum = LossMetrics::default();
        let mut count = 0usize;
        for _ in 0..self.agent.epochs {
            self.shuffle_rng.shuffle(&mut order);
            for chunk in order.chunks(self.agent.minibatch_size) {
                if let Some(m) = self.gradient_step(&batch.select(chunk), &settings)? {
                    sum.policy_loss += m.policy_loss;
                    sum.value_loss += m.value_loss;
                    sum.entropy += m.entropy;
                    sum.clip_fraction += m.clip_fraction;
                    count += 1;
                }
            }
        }
        Ok(mean_metrics(sum, count))
    }

    fn a2c_update(&mut self, batch: &Batch) -> Result<LossMetrics> {
        let settings = self.settings(None);
        let mut sum = LossMetrics::default();
        let mut count = 0usize;
        for _ in 0..self.agent.epochs {
            if let Some(m) = self.gradient_step(batch, &settings)? {
                sum = LossMetrics {
                    policy_loss: sum.policy_loss + m.policy_loss,
                    value_loss: sum.value_loss + m.value_loss,
                    entropy: sum.entropy + m.entropy,
                    clip_fraction: 0.0,
                };
                count += 1;
            }
        }
        Ok(mean_metrics(sum, count))
    }
}

fn mean_metrics(sum: LossMetrics, count: usize) -> LossMetrics {
    if count == 0 {
        return LossMetrics::default();
    }
    let c = count as f64;
    LossMetrics {
        policy_loss: sum.policy_loss / c,
        value_loss: sum.value_loss / c,
        entropy: sum.entropy / c,
        clip_fraction: sum.clip_fraction / c,
    }
}

impl<E: Environment + Serialize + DeserializeOwned> Trainer<E> {
    /// Writes nets, encoder, environments, memory and RNG positions as JSON.
    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn load_checkpoint(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}

/// Builds the environments for `spec` and runs every update, handing each
/// record to `on_record` as it is produced.
pub fn run_training_with(
    spec: &EnvSpec,
    agent: &AgentConfig,
    reward: &RewardConfig,
    seed: u64,
    mut on_record: impl FnMut(&RunRecord) -> Result<()>,
) -> Result<Vec<RunRecord>> {
    agent.validate()?;
    reward.validate()?;
    spec.validate()?;
    let envs = build_vec_env(spec, agent.workers, seed)?;
    let mut trainer = Trainer::new(envs, agent.clone(), reward.clone(), seed)?;
    let mut records = Vec::with_capacity(agent.num_updates() as usize);
    while !trainer.is_finished() {
        let trace = trainer.update()?;
        on_record(&trace.record)?;
        records.push(trace.record);
    }
    Ok(records)
}

pub fn run_training(spec: &EnvSpec, agent: &AgentConfig, reward: &RewardConfig, seed: u64) -> Result<Vec<RunRecord>> {
    run_training_with(spec, agent, reward, seed, |_| Ok(()))
}
