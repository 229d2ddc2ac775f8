//! ReLU multilayer perceptrons with a single logit output.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{dot, Matrix};
use super::{sigmoid, Predictor};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Affine layer `W x + b`, `W` stored output-major.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dense {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn new(weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::DimensionMismatch { expected: weights.rows(), actual: bias.len() });
        }
        Ok(Dense { weights, bias })
    }

    /// He-normal weights (unit gain on the final layer) and zero bias.
    pub(crate) fn random(inputs: usize, outputs: usize, gain: f64, rng: &mut StreamRng) -> Self {
        let scale = libm::sqrt(gain / inputs as f64);
        let data = (0..inputs * outputs).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        Dense {
            weights: Matrix::new(outputs, inputs, data).expect("shape is consistent"),
            bias: alloc::vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    #[inline]
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        for (o, (r, b)) in out.iter_mut().zip((0..self.outputs()).zip(&self.bias)) {
            *o = dot(self.weights.row(r), x) + b;
        }
    }
}

/// Hidden layers use ReLU; the last layer emits one logit read through a sigmoid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mlp {
    layers: Vec<Dense>,
}

/// Parameter gradients, one `(dW, db)` per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub layers: Vec<(Matrix, Vec<f64>)>,
}

impl Mlp {
    pub fn new(layers: Vec<Dense>) -> Result<Self> {
        let last = layers.last().ok_or_else(|| Error::invalid("mlp", "at least one layer required"))?;
        if last.outputs() != 1 {
            return Err(Error::invalid(
                "mlp",
                alloc::format!("final layer has {} outputs, expected 1", last.outputs()),
            ));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::DimensionMismatch { expected: pair[0].outputs(), actual: pair[1].inputs() });
            }
        }
        if layers.iter().any(|l| l.weights.as_slice().iter().chain(&l.bias).any(|v| !v.is_finite())) {
            return Err(Error::invalid("mlp", "parameters must be finite"));
        }
        Ok(Mlp { layers })
    }

    /// Randomly initialized network `input → hidden[0] → … → 1`.
    pub fn random(input_dim: usize, hidden: &[usize], rng: &mut StreamRng) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut fan_in = input_dim;
        for &width in hidden {
            layers.push(Dense::random(fan_in, width, 2.0, rng));
            fan_in = width;
        }
        layers.push(Dense::random(fan_in, 1, 1.0, rng));
        Mlp { layers }
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn into_layers(self) -> Vec<Dense> {
        self.layers
    }

    fn max_width(&self) -> usize {
        self.layers.iter().map(Dense::outputs).max().unwrap_or(1).max(self.input_dim())
    }

    fn logit_with<'a>(&self, x: &[f64], mut a: &'a mut [f64], mut b: &'a mut [f64]) -> f64 {
        let n = self.layers.len();
        a[..x.len()].copy_from_slice(x);
        let mut width = x.len();
        for (k, layer) in self.layers.iter().enumerate() {
            let out = &mut b[..layer.outputs()];
            layer.forward(&a[..width], out);
            if k + 1 < n {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            width = layer.outputs();
            core::mem::swap(&mut a, &mut b);
        }
        a[0]
    }

    /// Pre-sigmoid output.
    pub fn logit(&self, x: &[f64]) -> f64 {
        let w = self.max_width();
        let (mut a, mut b) = (alloc::vec![0.0; w], alloc::vec![0.0; w]);
        self.logit_with(x, &mut a, &mut b)
    }

    /// Mean binary cross-entropy over `rows` (row-major) and its gradient.
    pub fn loss_and_gradient(&self, rows: &[f64], labels: &[u8]) -> (f64, Gradient) {
        let d = self.input_dim();
        let n = labels.len();
        debug_assert_eq!(rows.len(), n * d);
        let mut grads: Vec<(Matrix, Vec<f64>)> = self
            .layers
            .iter()
            .map(|l| (Matrix::zeros(l.outputs(), l.inputs()), alloc::vec![0.0; l.outputs()]))
            .collect();
        // activations[k] is the input to layer k; the last entry is the logit
        let mut acts: Vec<Vec<f64>> = core::iter::once(alloc::vec![0.0; d])
            .chain(self.layers.iter().map(|l| alloc::vec![0.0; l.outputs()]))
            .collect();
        let mut delta: Vec<f64> = Vec::new();
        let mut prev: Vec<f64> = Vec::new();
        let mut loss = 0.0;
        let last = self.layers.len() - 1;
        for (x, &y) in rows.chunks_exact(d).zip(labels) {
            acts[0].copy_from_slice(x);
            for (k, layer) in self.layers.iter().enumerate() {
                let (input, rest) = acts.split_at_mut(k + 1);
                layer.forward(&input[k], &mut rest[0]);
                if k < last {
                    rest[0].iter_mut().for_each(|v| *v = v.max(0.0));
                }
            }
            let z = acts[last + 1][0];
            let y = f64::from(y);
            loss += softplus(z) - y * z;
            delta.clear();
            delta.push(sigmoid(z) - y);
            for k in (0..=last).rev() {
                let (dw, db) = &mut grads[k];
                let input = &acts[k];
                for (r, &g) in delta.iter().enumerate() {
                    db[r] += g;
                    let row = &mut dw.as_mut_slice()[r * input.len()..(r + 1) * input.len()];
                    for (w, a) in row.iter_mut().zip(input) {
                        *w += g * a;
                    }
                }
                if k > 0 {
                    prev.clear();
                    prev.resize(input.len(), 0.0);
                    self.layers[k].weights.mul_transpose_vec(&delta, &mut prev);
                    // ReLU derivative: active where the post-activation is positive
                    for (p, a) in prev.iter_mut().zip(input) {
                        if *a <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    core::mem::swap(&mut delta, &mut prev);
                }
            }
        }
        let scale = 1.0 / n as f64;
        for (dw, db) in &mut grads {
            dw.scale(scale);
            db.iter_mut().for_each(|v| *v *= scale);
        }
        (loss * scale, Gradient { layers: grads })
    }
}

pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + libm::log1p(libm::exp(-libm::fabs(z)))
}

impl Predictor for Mlp {
    fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    fn eval_batch(&self, rows: &[f64], out: &mut [f64]) {
        let w = self.max_width();
        let (mut a, mut b) = (alloc::vec![0.0; w], alloc::vec![0.0; w]);
        for (x, o) in rows.chunks_exact(self.input_dim()).zip(out) {
            *o = sigmoid(self.logit_with(x, &mut a, &mut b));
        }
    }
}
