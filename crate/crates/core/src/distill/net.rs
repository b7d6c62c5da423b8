//! A tiny fully-connected network with ReLU hidden layers and identity
//! output, deterministic seeded initialization, and flat parameter access
//! for the trainer and the gradient checker.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DistillError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct DenseLayer {
    /// Row-major `out_dim x in_dim`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
}

/// Seeded multi-layer perceptron. Hidden layers apply `max(0, .)`, the
/// output layer is affine, so the outputs are usable as logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyNet {
    sizes: Vec<usize>,
    layers: Vec<DenseLayer>,
    init_seed: u64,
}

impl ToyNet {
    /// Builds a net with the given layer sizes, weights and biases drawn
    /// uniformly from `[-r, r]` with `r = 1/sqrt(fan_in)` from a ChaCha
    /// stream seeded by `seed`.
    pub fn seeded(sizes: &[usize], seed: u64) -> Result<Self, DistillError> {
        if sizes.len() < 2 {
            return Err(DistillError::InvalidConfig(
                "network needs at least an input and an output layer".into(),
            ));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(DistillError::InvalidConfig(
                "layer sizes must be positive".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for pair in sizes.windows(2) {
            let (in_dim, out_dim) = (pair[0], pair[1]);
            let r = 1.0 / (in_dim as f64).sqrt();
            let weights = (0..in_dim * out_dim)
                .map(|_| rng.random_range(-r..=r))
                .collect();
            let biases = (0..out_dim).map(|_| rng.random_range(-r..=r)).collect();
            layers.push(DenseLayer {
                weights,
                biases,
                in_dim,
                out_dim,
            });
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            layers,
            init_seed: seed,
        })
    }

    /// Shape-consistency check, used after deserialization.
    pub fn validate(&self) -> Result<(), DistillError> {
        if self.sizes.len() < 2 || self.layers.len() != self.sizes.len() - 1 {
            return Err(DistillError::InvalidConfig(
                "layer count does not match size list".into(),
            ));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            let ok = layer.in_dim == self.sizes[i]
                && layer.out_dim == self.sizes[i + 1]
                && layer.weights.len() == layer.in_dim * layer.out_dim
                && layer.biases.len() == layer.out_dim;
            if !ok {
                return Err(DistillError::InvalidConfig(format!(
                    "layer {i} arrays do not match the declared sizes"
                )));
            }
        }
        Ok(())
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Flattens all parameters, layer by layer, weights then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.biases);
        }
        out
    }

    /// Writes a flat parameter vector back, inverse of [`Self::params`].
    pub fn set_params(&mut self, params: &[f64]) -> Result<(), DistillError> {
        if params.len() != self.num_params() {
            return Err(DistillError::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                params.len()
            )));
        }
        let mut offset = 0;
        for layer in &mut self.layers {
            let w_len = layer.weights.len();
            layer.weights.copy_from_slice(&params[offset..offset + w_len]);
            offset += w_len;
            let b_len = layer.biases.len();
            layer.biases.copy_from_slice(&params[offset..offset + b_len]);
            offset += b_len;
        }
        Ok(())
    }

    /// Deterministic forward pass producing output-layer logits.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, DistillError> {
        Ok(self.forward_trace(input)?.pop().unwrap())
    }

    /// Forward pass keeping every layer's activations; `result[0]` is the
    /// input, `result.last()` the logits.
    pub(crate) fn forward_trace(&self, input: &[f64]) -> Result<Vec<Vec<f64>>, DistillError> {
        if input.len() != self.input_dim() {
            return Err(DistillError::ShapeMismatch(format!(
                "input has {} values, network expects {}",
                input.len(),
                self.input_dim()
            )));
        }
        let mut trace = Vec::with_capacity(self.layers.len() + 1);
        trace.push(input.to_vec());
        for (li, layer) in self.layers.iter().enumerate() {
            let prev = trace.last().unwrap();
            let mut z = layer.biases.clone();
            for o in 0..layer.out_dim {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                z[o] += row.iter().zip(prev).map(|(w, a)| w * a).sum::<f64>();
            }
            if li + 1 < self.layers.len() {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            }
            trace.push(z);
        }
        Ok(trace)
    }

    /// Backpropagates `d loss / d logits` through the trace from
    /// [`Self::forward_trace`], accumulating into a flat gradient vector laid
    /// out like [`Self::params`].
    pub(crate) fn accumulate_grad(
        &self,
        trace: &[Vec<f64>],
        dlogits: &[f64],
        grad: &mut [f64],
    ) {
        debug_assert_eq!(grad.len(), self.num_params());
        let mut layer_offsets = Vec::with_capacity(self.layers.len());
        let mut offset = 0;
        for layer in &self.layers {
            layer_offsets.push(offset);
            offset += layer.weights.len() + layer.biases.len();
        }

        let mut delta = dlogits.to_vec();
        for (li, layer) in self.layers.iter().enumerate().rev() {
            let input = &trace[li];
            let base = layer_offsets[li];
            for o in 0..layer.out_dim {
                let w_base = base + o * layer.in_dim;
                for i in 0..layer.in_dim {
                    grad[w_base + i] += delta[o] * input[i];
                }
                grad[base + layer.weights.len() + o] += delta[o];
            }
            if li > 0 {
                let mut prev_delta = vec![0.0; layer.in_dim];
                for o in 0..layer.out_dim {
                    let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for i in 0..layer.in_dim {
                        prev_delta[i] += delta[o] * row[i];
                    }
                }
                // ReLU gate: the stored activation is max(0, z)
                for (d, a) in prev_delta.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
                delta = prev_delta;
            }
        }
    }
}
