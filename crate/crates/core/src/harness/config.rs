use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{AgentConfig, Algo};
use crate::envs::{EnvParams, EnvSpec};
use crate::error::{Error, Result};
use crate::rewards::{DecayMode, RewardConfig, RewardVariant};

/// Environment variable naming the directory relative output paths resolve against.
pub const OUTPUT_ROOT_ENV: &str = "REVD_OUTPUT_ROOT";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnv {
    id: String,
    #[serde(default)]
    params: EnvParams,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    algo: Option<Algo>,
    gamma: Option<f64>,
    gae_lambda: Option<f64>,
    clip: Option<f64>,
    value_clip: Option<f64>,
    no_value_clip: Option<bool>,
    entropy_coef: Option<f64>,
    value_coef: Option<f64>,
    max_grad_norm: Option<f64>,
    epochs: Option<usize>,
    minibatch_size: Option<usize>,
    normalize_advantages: Option<bool>,
    learning_rate: Option<f64>,
    hidden: Option<Vec<usize>>,
    workers: Option<usize>,
    steps_per_episode: Option<usize>,
    total_env_steps: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReward {
    /// Only meaningful inside `[[variants]]`.
    name: Option<String>,
    variant: Option<RewardVariant>,
    k: Option<usize>,
    alpha: Option<f64>,
    lambda0: Option<f64>,
    kappa: Option<f64>,
    epsilon: Option<f64>,
    decay_mode: Option<DecayMode>,
    embed_dim: Option<usize>,
    encoder_hidden: Option<Vec<usize>>,
    ride_radius: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    env: Option<RawEnv>,
    #[serde(default)]
    agent: RawAgent,
    #[serde(default)]
    reward: RawReward,
    seeds: Option<Vec<u64>>,
    output_dir: Option<PathBuf>,
    log_every: Option<u64>,
    #[serde(default)]
    variants: Vec<RawReward>,
}

/// A reward configuration compared against the others under paired seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantConfig {
    pub name: String,
    #[serde(flatten)]
    pub reward: RewardConfig,
}

/// Fully resolved and validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Emit an `update` event every this many updates.
    pub log_every: u64,
    pub env: EnvSpec,
    pub agent: AgentConfig,
    pub reward: RewardConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<VariantConfig>,
}

fn apply_reward(base: &RewardConfig, raw: &RawReward) -> RewardConfig {
    let mut r = base.clone();
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = raw.$f.clone() { r.$f = v; } )* };
    }
    set!(variant, k, alpha, lambda0, kappa, epsilon, decay_mode, embed_dim, encoder_hidden);
    if raw.ride_radius.is_some() {
        r.ride_radius = raw.ride_radius;
    }
    r
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig> {
    let env_raw = raw.env.ok_or_else(|| Error::Config("missing [env] table with an `id`".into()))?;
    let env = EnvSpec::with_params(env_raw.id, env_raw.params);
    env.validate()?;
    let discrete = env.is_discrete()?;

    let a = &raw.agent;
    let mut agent = AgentConfig::defaults_for(a.algo.unwrap_or(Algo::Ppo), discrete);
    macro_rules! set_agent {
        ($($f:ident),*) => { $( if let Some(v) = a.$f.clone() { agent.$f = v; } )* };
    }
    set_agent!(gamma, gae_lambda, clip, entropy_coef, value_coef, max_grad_norm, epochs, minibatch_size,
        normalize_advantages, learning_rate, hidden, workers, steps_per_episode, total_env_steps);
    if a.value_clip.is_some() {
        agent.value_clip = a.value_clip;
    }
    if a.no_value_clip == Some(true) {
        agent.value_clip = None;
    }
    agent.validate()?;

    if raw.reward.name.is_some() {
        return Err(Error::Config("`name` is only valid inside [[variants]]".into()));
    }
    let defaults = RewardConfig { k: if discrete { 5 } else { 3 }, ..RewardConfig::default() };
    let reward = apply_reward(&defaults, &raw.reward);
    reward.validate()?;

    let mut variants = Vec::with_capacity(raw.variants.len());
    for v in &raw.variants {
        let cfg = apply_reward(&reward, v);
        cfg.validate()?;
        let name = v.name.clone().unwrap_or_else(|| cfg.variant.name().to_string());
        if variants.iter().any(|x: &VariantConfig| x.name == name) {
            return Err(Error::Config(format!("duplicate variant name {name:?}")));
        }
        variants.push(VariantConfig { name, reward: cfg });
    }

    let seeds = raw.seeds.unwrap_or_else(|| vec![0]);
    if seeds.is_empty() {
        return Err(Error::Config("seed list is empty".into()));
    }
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != seeds.len() {
        return Err(Error::Config("seed list contains duplicates".into()));
    }
    let log_every = raw.log_every.unwrap_or(1);
    if log_every == 0 {
        return Err(Error::Config("log_every must be >= 1".into()));
    }
    let output_dir = raw.output_dir.unwrap_or_else(|| PathBuf::from("runs").join(&env.id));
    Ok(ExperimentConfig { seeds, output_dir, log_every, env, agent, reward, variants })
}

/// Sets `dotted.key = value` in a TOML table. The value is parsed as a TOML
/// value and falls back to a plain string.
fn set_path(table: &mut toml::Table, key: &str, value: &str) -> Result<()> {
    let parsed: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {value}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(value.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed key {key:?}")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{key:?}: {p:?} is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

impl ExperimentConfig {
    /// Parses TOML text, then applies `key=value` overrides (dotted keys, e.g.
    /// `reward.alpha=0.7`). Unknown keys are rejected.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
            set_path(&mut table, k.trim(), v.trim())?;
        }
        let raw: RawConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        resolve(raw)
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, overrides)
    }

    /// Config with every default for `env_id`.
    pub fn for_env(env_id: &str) -> Result<Self> {
        Self::parse(&format!("[env]\nid = {env_id:?}\n"), &[])
    }

    /// Resolved config as TOML that [`parse`](Self::parse) reads back unchanged.
    pub fn to_toml(&self) -> Result<String> {
        let err = |e: &dyn std::fmt::Display| Error::Config(e.to_string());
        let mut value = toml::Value::try_from(self).map_err(|e| err(&e))?;
        if self.agent.value_clip.is_none() {
            if let Some(agent) = value.get_mut("agent").and_then(|a| a.as_table_mut()) {
                agent.insert("no_value_clip".into(), toml::Value::Boolean(true));
            }
        }
        toml::to_string(&value).map_err(|e| err(&e))
    }

    /// `output_dir` joined onto `root` when it is relative.
    pub fn resolved_output_dir(&self, root: Option<&Path>) -> PathBuf {
        match root {
            Some(r) if self.output_dir.is_relative() => r.join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }
}
