use serde::{Deserialize, Serialize};

use crate::divergence::DivergenceParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardVariant {
    Revd,
    /// k-NN distance without the log.
    Re3,
    Re3Log,
    Ride,
    None,
}

impl RewardVariant {
    pub fn name(self) -> &'static str {
        match self {
            RewardVariant::Revd => "revd",
            RewardVariant::Re3 => "re3",
            RewardVariant::Re3Log => "re3_log",
            RewardVariant::Ride => "ride",
            RewardVariant::None => "none",
        }
    }
}

impl std::str::FromStr for RewardVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "revd" => Ok(RewardVariant::Revd),
            "re3" => Ok(RewardVariant::Re3),
            "re3_log" | "re3-log" => Ok(RewardVariant::Re3Log),
            "ride" => Ok(RewardVariant::Ride),
            "none" => Ok(RewardVariant::None),
            other => Err(Error::Config(format!("unknown reward variant {other:?}"))),
        }
    }
}

/// Index driving the decay `λ = λ₀(1−κ)^index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMode {
    /// One decay step per update (episode segment).
    #[default]
    PerEpisode,
    /// One decay step per environment step of each worker.
    PerStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub variant: RewardVariant,
    pub k: usize,
    pub alpha: f64,
    pub lambda0: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub decay_mode: DecayMode,
    pub embed_dim: usize,
    pub encoder_hidden: Vec<usize>,
    /// Pseudo-count radius for the impact-driven baseline; when unset it is
    /// fixed to the median within-episode nearest-neighbor distance of the
    /// first collected episodes.
    pub ride_radius: Option<f64>,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            variant: RewardVariant::Revd,
            k: 5,
            alpha: 0.5,
            lambda0: 0.1,
            kappa: 0.00001,
            epsilon: 0.0001,
            decay_mode: DecayMode::PerEpisode,
            embed_dim: crate::encoder::DEFAULT_EMBED_DIM,
            encoder_hidden: crate::encoder::DEFAULT_HIDDEN.to_vec(),
            ride_radius: None,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        DivergenceParams::new(self.alpha, self.k).map_err(|e| Error::Config(e.to_string()))?;
        if self.variant == RewardVariant::Revd && !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("revd requires alpha in (0, 1), got {}", self.alpha)));
        }
        if !(self.lambda0 >= 0.0) || !self.lambda0.is_finite() {
            return Err(Error::Config(format!("lambda0 must be finite and >= 0, got {}", self.lambda0)));
        }
        if !(0.0..1.0).contains(&self.kappa) {
            return Err(Error::Config(format!("kappa must lie in [0, 1), got {}", self.kappa)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.embed_dim == 0 || self.encoder_hidden.contains(&0) {
            return Err(Error::Config("encoder sizes must be >= 1".into()));
        }
        if let Some(r) = self.ride_radius {
            if !(r >= 0.0) {
                return Err(Error::Config(format!("ride_radius must be >= 0, got {r}")));
            }
        }
        Ok(())
    }

    pub fn divergence_params(&self) -> Result<DivergenceParams> {
        DivergenceParams::new(self.alpha, self.k)
    }
}
