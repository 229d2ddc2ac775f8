//! Black-box predictors and their training.
//!
//! Every model maps a d-vector to a probability in (0, 1); that scalar is
//! what the explainers attribute.

mod kernel;
mod linear;
mod matrix;
mod mlp;
mod spectral;
mod train;

pub use kernel::{KernelConfig, KernelModel};
pub use linear::LinearModel;
pub use matrix::Matrix;
pub use mlp::{Dense, Gradient, Mlp};
pub use spectral::{
    operator_norm, project_lipschitz, spectral_norm, spectral_norm_with, POWER_MAX_ITERS, POWER_MIN_ITERS,
    POWER_TOLERANCE,
};
pub use train::{accuracy, train, Architecture, TrainConfig, TrainReport, Trained};

use crate::error::{Error, Result};
use crate::geometry::NormOrder;

/// Largest slope of the logistic function, attained at 0.
pub const SIGMOID_SLOPE_BOUND: f64 = 0.25;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// A deterministic scalar function of a fixed-dimension input.
pub trait Predictor {
    fn input_dim(&self) -> usize;

    /// Evaluates `x`, which must have `input_dim()` entries.
    fn eval(&self, x: &[f64]) -> f64;

    /// Evaluates each `input_dim()`-sized row of `rows` into `out`.
    fn eval_batch(&self, rows: &[f64], out: &mut [f64]) {
        for (x, o) in rows.chunks_exact(self.input_dim()).zip(out) {
            *o = self.eval(x);
        }
    }

    /// Checked form of [`Predictor::eval`].
    fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), actual: x.len() });
        }
        Ok(self.eval(x))
    }
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn eval_batch(&self, rows: &[f64], out: &mut [f64]) {
        (**self).eval_batch(rows, out)
    }
}

/// Adapts a closure into a [`Predictor`].
#[derive(Clone, Copy)]
pub struct FnPredictor<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64> FnPredictor<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnPredictor { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64> Predictor for FnPredictor<F> {
    fn input_dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "arch", rename_all = "snake_case"))]
pub enum Model {
    Linear(LinearModel),
    Mlp(Mlp),
    Kernel(KernelModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Linear(_) => "linear",
            Model::Mlp(_) => "mlp",
            Model::Kernel(_) => "kernel",
        }
    }

    /// A global Lipschitz constant of the model output under `ord`, when one
    /// is available in closed form. Kernel machines return `None`.
    pub fn known_lipschitz_upper(&self, ord: NormOrder) -> Option<f64> {
        match self {
            Model::Linear(m) => Some(ord.dual().norm(&m.weights) * SIGMOID_SLOPE_BOUND),
            Model::Mlp(m) => {
                // ReLU is 1-Lipschitz coordinatewise, so layer norms multiply.
                let product: f64 = m
                    .layers()
                    .iter()
                    .map(|l| {
                        if ord.p() == 2.0 {
                            spectral_norm_with(&l.weights, 1e-13, 20_000)
                        } else {
                            operator_norm(&l.weights, ord)
                        }
                    })
                    .product();
                Some(product * SIGMOID_SLOPE_BOUND)
            }
            Model::Kernel(_) => None,
        }
    }

    /// Like [`Model::known_lipschitz_upper`] but an error for kernel models.
    pub fn require_lipschitz_upper(&self, ord: NormOrder) -> Result<f64> {
        self.known_lipschitz_upper(ord).ok_or(Error::NoKnownBound(self.kind()))
    }
}

impl Predictor for Model {
    fn input_dim(&self) -> usize {
        match self {
            Model::Linear(m) => m.input_dim(),
            Model::Mlp(m) => m.input_dim(),
            Model::Kernel(m) => m.input_dim(),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Model::Linear(m) => m.eval(x),
            Model::Mlp(m) => m.eval(x),
            Model::Kernel(m) => m.eval(x),
        }
    }

    fn eval_batch(&self, rows: &[f64], out: &mut [f64]) {
        match self {
            Model::Linear(m) => m.eval_batch(rows, out),
            Model::Mlp(m) => m.eval_batch(rows, out),
            Model::Kernel(m) => m.eval_batch(rows, out),
        }
    }
}
