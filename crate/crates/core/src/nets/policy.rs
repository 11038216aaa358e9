use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RngStream;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Action {
    Discrete(usize),
    Continuous(Vec<f64>),
}

/// A batch of actions aligned with the rows of a network output.
#[derive(Debug, Clone, Copy)]
pub enum Actions<'a> {
    Discrete(&'a [usize]),
    Continuous(ArrayView2<'a, f64>),
}

impl Actions<'_> {
    fn len(&self) -> usize {
        match self {
            Actions::Discrete(a) => a.len(),
            Actions::Continuous(a) => a.nrows(),
        }
    }
}

/// Per-row log-probabilities and entropies.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadEval {
    pub logprob: Vec<f64>,
    pub entropy: Vec<f64>,
}

/// Maps raw policy-network outputs to an action distribution.
///
/// `Categorical` treats the outputs as logits. `DiagonalGaussian` treats them
/// as the mean and carries a state-independent, learnable log standard
/// deviation per action dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PolicyHead {
    Categorical { actions: usize },
    DiagonalGaussian { log_std: Vec<f64> },
}

fn log_softmax_row(logits: ndarray::ArrayView1<'_, f64>) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

impl PolicyHead {
    pub fn gaussian(action_dim: usize) -> Self {
        PolicyHead::DiagonalGaussian { log_std: vec![0.0; action_dim] }
    }

    /// Width of the network output this head consumes.
    pub fn output_dim(&self) -> usize {
        match self {
            PolicyHead::Categorical { actions } => *actions,
            PolicyHead::DiagonalGaussian { log_std } => log_std.len(),
        }
    }

    /// Extra learnable parameters owned by the head (the Gaussian log-std).
    pub fn params(&self) -> &[f64] {
        match self {
            PolicyHead::Categorical { .. } => &[],
            PolicyHead::DiagonalGaussian { log_std } => log_std,
        }
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        match self {
            PolicyHead::Categorical { .. } => &mut [],
            PolicyHead::DiagonalGaussian { log_std } => log_std,
        }
    }

    fn check_output(&self, out: &ArrayView2<'_, f64>) -> Result<()> {
        if out.ncols() != self.output_dim() {
            return Err(Error::DimensionMismatch { expected: self.output_dim(), found: out.ncols() });
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("policy output"));
        }
        Ok(())
    }

    /// Softmax probabilities for a categorical head.
    pub fn probabilities(&self, out: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_output(&out)?;
        let mut probs = Array2::zeros(out.dim());
        for (i, row) in out.rows().into_iter().enumerate() {
            for (j, lp) in log_softmax_row(row).into_iter().enumerate() {
                probs[[i, j]] = lp.exp();
            }
        }
        Ok(probs)
    }

    pub fn sample(&self, out_row: ndarray::ArrayView1<'_, f64>, rng: &mut RngStream) -> Action {
        match self {
            PolicyHead::Categorical { .. } => {
                let probs: Vec<f64> = log_softmax_row(out_row).into_iter().map(f64::exp).collect();
                Action::Discrete(rng.categorical(&probs))
            }
            PolicyHead::DiagonalGaussian { log_std } => Action::Continuous(
                out_row
                    .iter()
                    .zip(log_std)
                    .map(|(mu, ls)| mu + ls.exp() * rng.normal())
                    .collect(),
            ),
        }
    }

    /// Most likely action (argmax / mean).
    pub fn mode(&self, out_row: ndarray::ArrayView1<'_, f64>) -> Action {
        match self {
            PolicyHead::Categorical { .. } => {
                let mut best = 0;
                for (i, v) in out_row.iter().enumerate() {
                    if *v > out_row[best] {
                        best = i;
                    }
                }
                Action::Discrete(best)
            }
            PolicyHead::DiagonalGaussian { .. } => Action::Continuous(out_row.to_vec()),
        }
    }

    fn check_actions(&self, out: &ArrayView2<'_, f64>, actions: &Actions<'_>) -> Result<()> {
        if actions.len() != out.nrows() {
            return Err(Error::DimensionMismatch { expected: out.nrows(), found: actions.len() });
        }
        match (self, actions) {
            (PolicyHead::Categorical { actions: n }, Actions::Discrete(a)) => {
                if let Some(bad) = a.iter().find(|&&x| x >= *n) {
                    return Err(Error::InvalidAction(format!("index {bad} with {n} actions")));
                }
                Ok(())
            }
            (PolicyHead::DiagonalGaussian { log_std }, Actions::Continuous(a)) => {
                if a.ncols() != log_std.len() {
                    return Err(Error::DimensionMismatch { expected: log_std.len(), found: a.ncols() });
                }
                Ok(())
            }
            _ => Err(Error::InvalidAction("action kind does not match policy head".into())),
        }
    }

    pub fn logprob_entropy(&self, out: ArrayView2<'_, f64>, actions: Actions<'_>) -> Result<HeadEval> {
        self.check_output(&out)?;
        self.check_actions(&out, &actions)?;
        let n = out.nrows();
        let mut logprob = Vec::with_capacity(n);
        let mut entropy = Vec::with_capacity(n);
        match (self, actions) {
            (PolicyHead::Categorical { .. }, Actions::Discrete(a)) => {
                for (row, &act) in out.rows().into_iter().zip(a) {
                    let lp = log_softmax_row(row);
                    logprob.push(lp[act]);
                    entropy.push(-lp.iter().map(|l| l.exp() * l).sum::<f64>());
                }
            }
            (PolicyHead::DiagonalGaussian { log_std }, Actions::Continuous(a)) => {
                let h: f64 = log_std.iter().map(|ls| 0.5 + 0.5 * LN_2PI + ls).sum();
                for (mu, act) in out.rows().into_iter().zip(a.rows()) {
                    let mut lp = 0.0;
                    for ((m, x), ls) in mu.iter().zip(act.iter()).zip(log_std) {
                        let z = (x - m) / ls.exp();
                        lp += -0.5 * z * z - ls - 0.5 * LN_2PI;
                    }
                    logprob.push(lp);
                    entropy.push(h);
                }
            }
            _ => unreachable!("checked above"),
        }
        Ok(HeadEval { logprob, entropy })
    }

    /// Vector-Jacobian product: given `dL/dlogprob` and `dL/dentropy` per row,
    /// returns `dL/dout` and `dL/dhead_params`.
    pub fn backward(
        &self,
        out: ArrayView2<'_, f64>,
        actions: Actions<'_>,
        d_logprob: &[f64],
        d_entropy: &[f64],
    ) -> Result<(Array2<f64>, Vec<f64>)> {
        self.check_output(&out)?;
        self.check_actions(&out, &actions)?;
        if d_logprob.len() != out.nrows() || d_entropy.len() != out.nrows() {
            return Err(Error::DimensionMismatch { expected: out.nrows(), found: d_logprob.len() });
        }
        let mut d_out = Array2::zeros(out.dim());
        let mut d_head = vec![0.0; self.params().len()];
        match (self, actions) {
            (PolicyHead::Categorical { .. }, Actions::Discrete(a)) => {
                for (i, row) in out.rows().into_iter().enumerate() {
                    let lp = log_softmax_row(row);
                    let h: f64 = -lp.iter().map(|l| l.exp() * l).sum::<f64>();
                    for (j, l) in lp.iter().enumerate() {
                        let p = l.exp();
                        let dlogp = if j == a[i] { 1.0 - p } else { -p };
                        let dh = -p * (l + h);
                        d_out[[i, j]] = d_logprob[i] * dlogp + d_entropy[i] * dh;
                    }
                }
            }
            (PolicyHead::DiagonalGaussian { log_std }, Actions::Continuous(a)) => {
                for i in 0..out.nrows() {
                    for (j, ls) in log_std.iter().enumerate() {
                        let sigma = ls.exp();
                        let diff = a[[i, j]] - out[[i, j]];
                        d_out[[i, j]] = d_logprob[i] * diff / (sigma * sigma);
                        let z2 = (diff / sigma).powi(2);
                        d_head[j] += d_logprob[i] * (z2 - 1.0) + d_entropy[i];
                    }
                }
            }
            _ => unreachable!("checked above"),
        }
        Ok((d_out, d_head))
    }
}
