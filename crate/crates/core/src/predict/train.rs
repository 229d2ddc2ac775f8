//! Mini-batch SGD with momentum on binary cross-entropy, with an optional
//! per-layer operator-norm cap enforced after every update.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;

use super::kernel::{KernelConfig, KernelModel};
use super::linear::LinearModel;
use super::mlp::Mlp;
use super::spectral::project_in_place;
use super::{Model, Predictor};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::NormOrder;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Architecture {
    Mlp2,
    Mlp4,
    Linear,
    Kernel,
}

impl Architecture {
    pub const ALL: [Architecture; 4] =
        [Architecture::Mlp2, Architecture::Mlp4, Architecture::Linear, Architecture::Kernel];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Mlp2 => "mlp2",
            Architecture::Mlp4 => "mlp4",
            Architecture::Linear => "linear",
            Architecture::Kernel => "kernel",
        }
    }

    /// Number of hidden ReLU layers.
    pub fn hidden_layers(self) -> usize {
        match self {
            Architecture::Mlp2 => 2,
            Architecture::Mlp4 => 4,
            Architecture::Linear | Architecture::Kernel => 0,
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Architecture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::invalid("architecture", alloc::format!("unknown architecture {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Per-layer spectral-norm cap; `None` trains unconstrained.
    pub lipschitz_cap: Option<f64>,
    pub seed: u64,
    /// Width of every hidden layer.
    pub hidden_width: usize,
    pub kernel: KernelConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 100,
            learning_rate: 0.01,
            momentum: 0.9,
            lipschitz_cap: None,
            seed: 0,
            hidden_width: 200,
            kernel: KernelConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be positive"));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid("learning_rate", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("momentum", "must lie in [0, 1)"));
        }
        if let Some(cap) = self.lipschitz_cap {
            if !(cap > 0.0) || !cap.is_finite() {
                return Err(Error::invalid("lipschitz_cap", "must be positive"));
            }
        }
        if self.hidden_width == 0 {
            return Err(Error::invalid("hidden_width", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainReport {
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
    /// Mean loss over the final epoch; `None` when no update ran.
    pub final_loss: Option<f64>,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub model: Model,
    pub report: TrainReport,
}

/// Fraction of samples whose thresholded prediction equals the label.
pub fn accuracy<P: Predictor + ?Sized>(model: &P, data: &Dataset) -> f64 {
    let mut out = alloc::vec![0.0; data.len()];
    model.eval_batch(data.features(), &mut out);
    let hits = out.iter().zip(data.labels()).filter(|(&p, &y)| u8::from(p >= 0.5) == y).count();
    hits as f64 / data.len() as f64
}

pub fn train(data: &Dataset, arch: Architecture, cfg: &TrainConfig, test: Option<&Dataset>) -> Result<Trained> {
    cfg.validate()?;
    if let Some(t) = test {
        if t.dim() != data.dim() {
            return Err(Error::DimensionMismatch { expected: data.dim(), actual: t.dim() });
        }
    }
    let (model, final_loss, steps) = match arch {
        Architecture::Kernel => (Model::Kernel(KernelModel::fit(data, &cfg.kernel, cfg.seed)?), None, 0),
        _ => {
            let hidden = alloc::vec![cfg.hidden_width; arch.hidden_layers()];
            let (net, loss, steps) = sgd(data, &hidden, cfg)?;
            let model = if arch == Architecture::Linear {
                let layer = net.into_layers().pop().expect("one layer");
                Model::Linear(LinearModel::new(layer.weights.into_vec(), layer.bias[0])?)
            } else {
                Model::Mlp(net)
            };
            (model, loss, steps)
        }
    };
    let report = TrainReport {
        train_accuracy: accuracy(&model, data),
        test_accuracy: test.map(|t| accuracy(&model, t)),
        final_loss,
        steps,
    };
    Ok(Trained { model, report })
}

fn project_all(net: &mut Mlp, cap: Option<f64>) -> Result<()> {
    if let Some(cap) = cap {
        for layer in net.layers_mut() {
            project_in_place(&mut layer.weights, cap, NormOrder::L2)?;
        }
    }
    Ok(())
}

fn sgd(data: &Dataset, hidden: &[usize], cfg: &TrainConfig) -> Result<(Mlp, Option<f64>, usize)> {
    let d = data.dim();
    let mut net = Mlp::random(d, hidden, &mut rng::stream(cfg.seed, rng::tag::INIT));
    project_all(&mut net, cfg.lipschitz_cap)?;

    let mut velocity: Vec<(Vec<f64>, Vec<f64>)> = net
        .layers()
        .iter()
        .map(|l| (alloc::vec![0.0; l.weights.as_slice().len()], alloc::vec![0.0; l.bias.len()]))
        .collect();
    let mut shuffle = rng::stream(cfg.seed, rng::tag::SHUFFLE);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rows = Vec::with_capacity(cfg.batch_size * d);
    let mut labels = Vec::with_capacity(cfg.batch_size);
    let mut final_loss = None;
    let mut steps = 0;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle);
        let (mut epoch_loss, mut seen) = (0.0, 0usize);
        for batch in order.chunks(cfg.batch_size) {
            rows.clear();
            labels.clear();
            for &i in batch {
                rows.extend_from_slice(data.sample(i));
                labels.push(data.label(i));
            }
            let (loss, grad) = net.loss_and_gradient(&rows, &labels);
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            epoch_loss += loss * batch.len() as f64;
            seen += batch.len();

            for ((layer, (dw, db)), (vw, vb)) in net.layers_mut().iter_mut().zip(&grad.layers).zip(&mut velocity) {
                for ((w, g), v) in layer.weights.as_mut_slice().iter_mut().zip(dw.as_slice()).zip(vw.iter_mut()) {
                    *v = cfg.momentum * *v - cfg.learning_rate * g;
                    *w += *v;
                }
                for ((b, g), v) in layer.bias.iter_mut().zip(db).zip(vb.iter_mut()) {
                    *v = cfg.momentum * *v - cfg.learning_rate * g;
                    *b += *v;
                }
            }
            // Weights can stay finite while their product overflows, which
            // leaves a model with no usable Lipschitz bound.
            let finite = net.layers().iter().all(|l| l.bias.iter().all(|v| v.is_finite()))
                && net
                    .layers()
                    .iter()
                    .map(|l| libm::sqrt(l.weights.as_slice().iter().map(|w| w * w).sum::<f64>()))
                    .product::<f64>()
                    .is_finite();
            if !finite {
                return Err(Error::Diverged { epoch });
            }
            project_all(&mut net, cfg.lipschitz_cap)?;
            steps += 1;
        }
        final_loss = Some(epoch_loss / seen as f64);
    }
    Ok((net, final_loss, steps))
}
