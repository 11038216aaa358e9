use serde::{Deserialize, Serialize};

use super::wrappers::{check_probability, sign};
use super::{ActionSpace, Chain, Environment, FourRoom, GoalMode, GridObservation, PointMaze, PointReward, Step};
use crate::error::{Error, Result};
use crate::nets::Action;
use crate::numerics::RngStream;

/// Concrete environments addressable by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BaseEnv {
    FourRoom(FourRoom),
    Chain(Chain),
    PointMaze(PointMaze),
}

impl Environment for BaseEnv {
    fn observation_dim(&self) -> usize {
        match self {
            BaseEnv::FourRoom(e) => e.observation_dim(),
            BaseEnv::Chain(e) => e.observation_dim(),
            BaseEnv::PointMaze(e) => e.observation_dim(),
        }
    }

    fn action_space(&self) -> ActionSpace {
        match self {
            BaseEnv::FourRoom(e) => e.action_space(),
            BaseEnv::Chain(e) => e.action_space(),
            BaseEnv::PointMaze(e) => e.action_space(),
        }
    }

    fn reset(&mut self) -> Vec<f64> {
        match self {
            BaseEnv::FourRoom(e) => e.reset(),
            BaseEnv::Chain(e) => e.reset(),
            BaseEnv::PointMaze(e) => e.reset(),
        }
    }

    fn step(&mut self, action: &Action) -> Result<Step> {
        match self {
            BaseEnv::FourRoom(e) => e.step(action),
            BaseEnv::Chain(e) => e.step(action),
            BaseEnv::PointMaze(e) => e.step(action),
        }
    }
}

/// Optional parameters for an environment id. Unset fields take per-env defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvParams {
    pub max_steps: Option<usize>,
    pub goal_reward: Option<f64>,
    pub observation: Option<GridObservation>,
    pub reward_mode: Option<PointReward>,
    pub goal_radius: Option<f64>,
    pub goal_mode: Option<GoalMode>,
    /// Probability of zeroing each extrinsic reward; off when unset.
    pub zero_probability: Option<f64>,
    pub sign_clip: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    FourRoom(usize),
    Chain(usize),
    PointMaze(usize),
}

/// Environment id plus parameters, e.g. `fourroom-15`, `chain-50`, `pointmaze-2d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub id: String,
    #[serde(default)]
    pub params: EnvParams,
}

fn parse_kind(id: &str) -> Result<Kind> {
    let bad = || Error::Config(format!("unknown environment id {id:?} (expected fourroom-N, chain-N or pointmaze-Nd)"));
    let (name, arg) = id.split_once('-').ok_or_else(bad)?;
    match name {
        "fourroom" => Ok(Kind::FourRoom(arg.parse().map_err(|_| bad())?)),
        "chain" => Ok(Kind::Chain(arg.parse().map_err(|_| bad())?)),
        "pointmaze" => Ok(Kind::PointMaze(arg.strip_suffix('d').ok_or_else(bad)?.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

impl EnvSpec {
    pub fn new(id: impl Into<String>) -> Self {
        Self { id: id.into(), params: EnvParams::default() }
    }

    pub fn with_params(id: impl Into<String>, params: EnvParams) -> Self {
        Self { id: id.into(), params }
    }

    pub fn default_max_steps(&self) -> Result<usize> {
        Ok(match parse_kind(&self.id)? {
            Kind::FourRoom(n) => n * n,
            Kind::Chain(n) => 2 * n,
            Kind::PointMaze(_) => 200,
        })
    }

    /// Builds the base environment, ignoring reward wrappers.
    pub fn build_base(&self, seed: u64) -> Result<BaseEnv> {
        let p = &self.params;
        let max_steps = match p.max_steps {
            Some(m) => m,
            None => self.default_max_steps()?,
        };
        let goal_reward = p.goal_reward.unwrap_or(1.0);
        Ok(match parse_kind(&self.id)? {
            Kind::FourRoom(n) => BaseEnv::FourRoom(
                FourRoom::new(n, goal_reward, max_steps, p.observation.unwrap_or_default())?
                    .with_goal_mode(p.goal_mode.unwrap_or_default()),
            ),
            Kind::Chain(n) => BaseEnv::Chain(Chain::new(n, goal_reward, max_steps)?),
            Kind::PointMaze(d) => BaseEnv::PointMaze(PointMaze::new(
                d,
                p.goal_radius.unwrap_or(0.1),
                max_steps,
                p.reward_mode.unwrap_or_default(),
                seed,
            )?),
        })
    }

    /// Builds the environment with its reward wrappers. `mask_seed` keys the
    /// sparsification stream.
    pub fn build(&self, seed: u64, mask_seed: u64) -> Result<EnvStack> {
        let base = self.build_base(seed)?;
        let sparsify = match self.params.zero_probability {
            Some(p) => {
                check_probability(p)?;
                Some((p, RngStream::new(mask_seed)))
            }
            None => None,
        };
        Ok(EnvStack { base, sign_clip: self.params.sign_clip.unwrap_or(false), sparsify })
    }

    pub fn validate(&self) -> Result<()> {
        self.build(0, 0).map(|_| ())
    }

    pub fn is_discrete(&self) -> Result<bool> {
        Ok(!matches!(parse_kind(&self.id)?, Kind::PointMaze(_)))
    }
}

/// Base environment plus the optional reward wrappers (sign, then sparsify).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvStack {
    base: BaseEnv,
    sign_clip: bool,
    sparsify: Option<(f64, RngStream)>,
}

impl EnvStack {
    pub fn base(&self) -> &BaseEnv {
        &self.base
    }
}

impl Environment for EnvStack {
    fn observation_dim(&self) -> usize {
        self.base.observation_dim()
    }

    fn action_space(&self) -> ActionSpace {
        self.base.action_space()
    }

    fn reset(&mut self) -> Vec<f64> {
        self.base.reset()
    }

    fn step(&mut self, action: &Action) -> Result<Step> {
        let mut s = self.base.step(action)?;
        if self.sign_clip {
            s.reward = sign(s.reward);
        }
        if let Some((p, rng)) = self.sparsify.as_mut() {
            if rng.bernoulli(*p) {
                s.reward = 0.0;
            }
        }
        Ok(s)
    }
}
