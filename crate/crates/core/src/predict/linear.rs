use alloc::vec::Vec;

use super::matrix::dot;
use super::{sigmoid, Predictor};
use crate::error::{Error, Result};

/// Logistic model `sigmoid(w · x + b)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("linear model", "needs at least one weight"));
        }
        if weights.iter().chain(core::iter::once(&bias)).any(|v| !v.is_finite()) {
            return Err(Error::invalid("linear model", "parameters must be finite"));
        }
        Ok(LinearModel { weights, bias })
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

impl Predictor for LinearModel {
    fn input_dim(&self) -> usize {
        self.weights.len()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }
}
