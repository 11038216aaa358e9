use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct Layer {
    spec: LayerSpec,
    weight_offset: usize,
    bias_offset: usize,
}

#[derive(Debug, Clone)]
struct ForwardCache {
    inputs: Vec<Array2<f64>>,
    outputs: Vec<Array2<f64>>,
}

/// Parameter gradients (same flat layout as [`SmallNet::params`]) and the
/// gradient with respect to the network input.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub params: Vec<f64>,
    pub input: Array2<f64>,
}

/// Dense feed-forward network. Parameters live in one flat vector, layer by
/// layer: weights (row-major `outputs × inputs`) followed by biases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmallNet {
    layers: Vec<Layer>,
    params: Vec<f64>,
    init_seed: u64,
    #[serde(skip)]
    cache: Option<ForwardCache>,
}

impl PartialEq for SmallNet {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers && self.params == other.params && self.init_seed == other.init_seed
    }
}

/// Glorot-style uniform bound `sqrt(6 / (fan_in + fan_out))`.
pub fn scaled_uniform_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

impl SmallNet {
    /// MLP with `sizes = [input, hidden.., output]`, `hidden` activation on every
    /// layer but the last, `output` activation on the last. Weights are drawn
    /// from `U(-b, b)` with the scaled-uniform bound; biases start at zero.
    pub fn mlp(sizes: &[usize], hidden: Activation, output: Activation, seed: u64) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::param("an MLP needs at least input and output sizes"));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::param(format!("layer sizes must be >= 1, got {sizes:?}")));
        }
        let specs: Vec<LayerSpec> = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| LayerSpec {
                inputs: w[0],
                outputs: w[1],
                activation: if i + 2 == sizes.len() { output } else { hidden },
            })
            .collect();
        let mut net = Self::zeros(&specs, seed)?;
        let mut rng = RngStream::new(seed);
        for layer in &net.layers {
            let bound = scaled_uniform_bound(layer.spec.inputs, layer.spec.outputs);
            let n = layer.spec.inputs * layer.spec.outputs;
            for w in &mut net.params[layer.weight_offset..layer.weight_offset + n] {
                *w = rng.uniform(-bound, bound);
            }
        }
        Ok(net)
    }

    /// All-zero parameters with the given layer layout.
    pub fn zeros(specs: &[LayerSpec], seed: u64) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::param("network needs at least one layer"));
        }
        let mut layers = Vec::with_capacity(specs.len());
        let mut offset = 0;
        for (i, spec) in specs.iter().enumerate() {
            if spec.inputs == 0 || spec.outputs == 0 {
                return Err(Error::param("layer dimensions must be >= 1"));
            }
            if i > 0 && specs[i - 1].outputs != spec.inputs {
                return Err(Error::DimensionMismatch {
                    expected: specs[i - 1].outputs,
                    found: spec.inputs,
                });
            }
            let weight_offset = offset;
            let bias_offset = offset + spec.inputs * spec.outputs;
            offset = bias_offset + spec.outputs;
            layers.push(Layer { spec: *spec, weight_offset, bias_offset });
        }
        Ok(Self { layers, params: vec![0.0; offset], init_seed: seed, cache: None })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].spec.inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].spec.outputs
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }

    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Mutable parameter access; invalidates any cached forward pass.
    pub fn params_mut(&mut self) -> &mut [f64] {
        self.cache = None;
        &mut self.params
    }

    pub fn weight(&self, layer: usize) -> ArrayView2<'_, f64> {
        let l = &self.layers[layer];
        let n = l.spec.inputs * l.spec.outputs;
        ArrayView2::from_shape((l.spec.outputs, l.spec.inputs), &self.params[l.weight_offset..l.weight_offset + n])
            .expect("layout is consistent")
    }

    pub fn bias(&self, layer: usize) -> ArrayView1<'_, f64> {
        let l = &self.layers[layer];
        ArrayView1::from(&self.params[l.bias_offset..l.bias_offset + l.spec.outputs])
    }

    fn check_input(&self, x: &ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), found: x.ncols() });
        }
        Ok(())
    }

    fn layer_forward(&self, i: usize, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut y = x.dot(&self.weight(i).t());
        y += &self.bias(i);
        let act = self.layers[i].spec.activation;
        if act != Activation::Identity {
            y.mapv_inplace(|v| act.apply(v));
        }
        y
    }

    /// Inference forward pass; leaves the gradient cache untouched.
    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut h = self.layer_forward(0, x);
        for i in 1..self.layers.len() {
            h = self.layer_forward(i, h.view());
        }
        Ok(h)
    }

    /// Forward pass that records activations for a following [`backward`](Self::backward).
    pub fn forward_train(&mut self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut outputs = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        for i in 0..self.layers.len() {
            let y = self.layer_forward(i, h.view());
            inputs.push(h);
            outputs.push(y.clone());
            h = y;
        }
        self.cache = Some(ForwardCache { inputs, outputs });
        Ok(h)
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
    }

    /// Reverse-mode gradients of `sum(upstream ⊙ output)` for the cached batch.
    pub fn backward(&self, upstream: ArrayView2<'_, f64>) -> Result<Gradients> {
        let cache = self.cache.as_ref().ok_or(Error::NoCachedForward)?;
        let last = &cache.outputs[cache.outputs.len() - 1];
        if upstream.dim() != last.dim() {
            return Err(Error::DimensionMismatch { expected: last.ncols(), found: upstream.ncols() });
        }
        let mut grads = vec![0.0; self.params.len()];
        let mut g = upstream.to_owned();
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let act = layer.spec.activation;
            if act != Activation::Identity {
                ndarray::Zip::from(&mut g)
                    .and(&cache.outputs[i])
                    .for_each(|gv, &y| *gv *= act.derivative_from_output(y));
            }
            let dw = g.t().dot(&cache.inputs[i]);
            let n = layer.spec.inputs * layer.spec.outputs;
            for (dst, src) in grads[layer.weight_offset..layer.weight_offset + n].iter_mut().zip(dw.iter()) {
                *dst = *src;
            }
            let db = g.sum_axis(Axis(0));
            for (dst, src) in grads[layer.bias_offset..layer.bias_offset + layer.spec.outputs].iter_mut().zip(db.iter()) {
                *dst = *src;
            }
            g = g.dot(&self.weight(i));
        }
        Ok(Gradients { params: grads, input: g })
    }

    /// Order-sensitive checksum of the parameters.
    pub fn checksum(&self) -> u64 {
        self.params.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, p| {
            (h ^ p.to_bits()).wrapping_mul(0x0100_0000_01b3)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn hand_net() -> SmallNet {
        // 2 -> 2 (relu) -> 1 (identity)
        let specs = [
            LayerSpec { inputs: 2, outputs: 2, activation: Activation::Relu },
            LayerSpec { inputs: 2, outputs: 1, activation: Activation::Identity },
        ];
        let mut net = SmallNet::zeros(&specs, 0).unwrap();
        net.params_mut().copy_from_slice(&[1.0, 2.0, -1.0, 1.0, 0.5, -3.0, 2.0, -1.0, 0.25]);
        net
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let spec = [LayerSpec { inputs: 3, outputs: 3, activation: Activation::Identity }];
        let mut net = SmallNet::zeros(&spec, 0).unwrap();
        for i in 0..3 {
            net.params_mut()[i * 3 + i] = 1.0;
        }
        let x = array![[1.0, -2.0, 3.5], [0.0, 4.0, -1.0]];
        assert_eq!(net.forward(x.view()).unwrap(), x);
    }

    #[test]
    fn relu_zeroes_negative_preactivations() {
        let spec = [LayerSpec { inputs: 2, outputs: 2, activation: Activation::Relu }];
        let mut net = SmallNet::zeros(&spec, 0).unwrap();
        net.params_mut().copy_from_slice(&[1.0, 0.0, 0.0, 1.0, -1.0, -1.0]);
        let y = net.forward(array![[0.5, 0.2]].view()).unwrap();
        assert_eq!(y, array![[0.0, 0.0]]);
    }

    #[test]
    fn hand_computed_two_layer_forward() {
        // h = relu([1*1 + 2*2 + 0.5, -1*1 + 1*2 - 3]) = relu([5.5, -2]) = [5.5, 0]
        // y = 2*5.5 - 1*0 + 0.25 = 11.25
        let net = hand_net();
        let y = net.forward(array![[1.0, 2.0]].view()).unwrap();
        assert_eq!(y, array![[11.25]]);
    }

    #[test]
    fn linear_weight_gradient_is_input() {
        let spec = [LayerSpec { inputs: 3, outputs: 1, activation: Activation::Identity }];
        let mut net = SmallNet::mlp(&[3, 1], Activation::Identity, Activation::Identity, 4).unwrap();
        assert_eq!(net.layer_specs(), spec.to_vec());
        let x = array![[0.3, -1.2, 2.0]];
        net.forward_train(x.view()).unwrap();
        let g = net.backward(array![[1.0]].view()).unwrap();
        assert_eq!(&g.params[..3], &[0.3, -1.2, 2.0]);
        assert_eq!(g.params[3], 1.0);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut net = SmallNet::mlp(&[4, 8, 3], Activation::Tanh, Activation::Identity, 9).unwrap();
        let x = Array2::from_shape_fn((5, 4), |(i, j)| (i as f64 - j as f64) * 0.3);
        net.forward_train(x.view()).unwrap();
        let g = net.backward(Array2::zeros((5, 3)).view()).unwrap();
        assert!(g.params.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn backward_without_forward_fails() {
        let net = SmallNet::mlp(&[2, 2], Activation::Tanh, Activation::Identity, 1).unwrap();
        assert!(matches!(net.backward(array![[1.0, 1.0]].view()), Err(Error::NoCachedForward)));
    }

    #[test]
    fn shape_errors() {
        let net = SmallNet::mlp(&[2, 2], Activation::Tanh, Activation::Identity, 1).unwrap();
        assert!(net.forward(array![[1.0, 1.0, 1.0]].view()).is_err());
        assert!(SmallNet::mlp(&[2, 0, 1], Activation::Tanh, Activation::Identity, 1).is_err());
        assert!(SmallNet::mlp(&[2], Activation::Tanh, Activation::Identity, 1).is_err());
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = SmallNet::mlp(&[4, 64, 64, 8], Activation::Relu, Activation::Identity, 1).unwrap();
        let b = SmallNet::mlp(&[4, 64, 64, 8], Activation::Relu, Activation::Identity, 1).unwrap();
        let c = SmallNet::mlp(&[4, 64, 64, 8], Activation::Relu, Activation::Identity, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.params(), c.params());
        let bound = scaled_uniform_bound(4, 64);
        assert!(a.weight(0).iter().all(|w| w.abs() <= bound));
        assert!(a.bias(0).iter().all(|&b| b == 0.0));
    }
}
