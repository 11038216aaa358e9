//! Fixed, randomly initialized state encoder.
//!
//! The encoder is an MLP (ReLU hidden layers, linear output) whose parameters
//! are drawn once from a seeded scaled-uniform scheme and never updated. It
//! only needs to roughly preserve distances between observations so that
//! k-NN distances in embedding space track visitation structure.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nets::{Activation, LayerSpec, SmallNet};
use crate::numerics::PointSet;

pub const DEFAULT_EMBED_DIM: usize = 64;
pub const DEFAULT_HIDDEN: [usize; 2] = [64, 64];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedEncoder {
    obs_dim: usize,
    embed_dim: usize,
    hidden: Vec<usize>,
    seed: u64,
    net: SmallNet,
}

impl FixedEncoder {
    pub fn new(obs_dim: usize, embed_dim: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        if obs_dim == 0 || embed_dim == 0 || hidden.contains(&0) {
            return Err(Error::param(format!(
                "encoder dimensions must be >= 1 (obs {obs_dim}, embed {embed_dim}, hidden {hidden:?})"
            )));
        }
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(obs_dim);
        sizes.extend_from_slice(hidden);
        sizes.push(embed_dim);
        let net = SmallNet::mlp(&sizes, Activation::Relu, Activation::Identity, seed)?;
        Ok(Self { obs_dim, embed_dim, hidden: hidden.to_vec(), seed, net })
    }

    /// Builds an encoder from explicit parameters (flat layout of [`SmallNet`]).
    pub fn from_parameters(obs_dim: usize, embed_dim: usize, hidden: &[usize], params: &[f64]) -> Result<Self> {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(embed_dim);
        let specs: Vec<LayerSpec> = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| LayerSpec {
                inputs: w[0],
                outputs: w[1],
                activation: if i + 2 == sizes.len() { Activation::Identity } else { Activation::Relu },
            })
            .collect();
        let mut net = SmallNet::zeros(&specs, 0)?;
        if params.len() != net.num_params() {
            return Err(Error::DimensionMismatch { expected: net.num_params(), found: params.len() });
        }
        net.params_mut().copy_from_slice(params);
        Ok(Self { obs_dim, embed_dim, hidden: hidden.to_vec(), seed: 0, net })
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        self.net.layer_specs()
    }

    pub fn params(&self) -> &[f64] {
        self.net.params()
    }

    pub fn checksum(&self) -> u64 {
        self.net.checksum()
    }

    /// Encodes a `T × obs_dim` batch of states into `T × embed_dim`.
    pub fn encode(&self, states: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if states.ncols() != self.obs_dim {
            return Err(Error::DimensionMismatch { expected: self.obs_dim, found: states.ncols() });
        }
        if states.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("encoder input"));
        }
        if states.nrows() == 0 {
            return Ok(Array2::zeros((0, self.embed_dim)));
        }
        self.net.forward(states)
    }

    pub fn encode_episode(&self, states: ArrayView2<'_, f64>, episode_index: usize, worker_id: usize) -> Result<EpisodeEmbeddings> {
        EpisodeEmbeddings::new(self.encode(states)?, episode_index, worker_id)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Encoded visited states of one episode (one row per state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeEmbeddings {
    embeddings: Array2<f64>,
    pub episode_index: usize,
    pub worker_id: usize,
}

impl EpisodeEmbeddings {
    pub fn new(embeddings: Array2<f64>, episode_index: usize, worker_id: usize) -> Result<Self> {
        if embeddings.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("episode embeddings"));
        }
        Ok(Self { embeddings, episode_index, worker_id })
    }

    /// Convenience constructor for one-dimensional embeddings.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        let arr = Array2::from_shape_vec((values.len(), 1), values.to_vec()).map_err(|e| Error::param(e.to_string()))?;
        Self::new(arr, 0, 0)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: r.len() });
            }
            flat.extend_from_slice(r);
        }
        let arr = Array2::from_shape_vec((rows.len(), d), flat).map_err(|e| Error::param(e.to_string()))?;
        Self::new(arr, 0, 0)
    }

    pub fn len(&self) -> usize {
        self.embeddings.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.embeddings.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.embeddings.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.embeddings.view()
    }

    pub fn points(&self) -> Result<PointSet> {
        PointSet::new(self.embeddings.clone())
    }

    pub fn map(&self, f: impl Fn(ArrayView2<'_, f64>) -> Array2<f64>) -> Result<Self> {
        Self::new(f(self.view()), self.episode_index, self.worker_id)
    }
}
