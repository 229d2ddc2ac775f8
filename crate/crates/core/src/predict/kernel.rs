//! Gaussian-kernel machine fitted by ridge regression on ±1 targets.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{sigmoid, Predictor};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// `sigmoid(Σ_j c_j exp(-γ ‖x - x_j‖²) + b)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelModel {
    /// Row-major, `coefficients.len()` rows of `dim` values.
    pub centers: Vec<f64>,
    pub dim: usize,
    pub coefficients: Vec<f64>,
    pub bandwidth: f64,
    pub bias: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct KernelConfig {
    pub max_centers: usize,
    pub ridge: f64,
    /// `None` uses `1 / (dim · var(X))` over the centers.
    pub bandwidth: Option<f64>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { max_centers: 1000, ridge: 1.0, bandwidth: None }
    }
}

impl KernelModel {
    pub fn new(centers: Vec<f64>, dim: usize, coefficients: Vec<f64>, bandwidth: f64, bias: f64) -> Result<Self> {
        if dim == 0 || centers.len() != coefficients.len() * dim {
            return Err(Error::invalid("kernel model", "centers and coefficients disagree"));
        }
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::invalid("kernel model", alloc::format!("bandwidth must be positive, got {bandwidth}")));
        }
        if centers.iter().chain(&coefficients).chain(core::iter::once(&bias)).any(|v| !v.is_finite()) {
            return Err(Error::invalid("kernel model", "parameters must be finite"));
        }
        Ok(KernelModel { centers, dim, coefficients, bandwidth, bias })
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.centers
            .chunks_exact(self.dim)
            .zip(&self.coefficients)
            .map(|(c, a)| a * libm::exp(-self.bandwidth * sq_dist(c, x)))
            .sum::<f64>()
            + self.bias
    }

    /// Fits on a seeded subsample of at most `cfg.max_centers` points.
    pub fn fit(data: &Dataset, cfg: &KernelConfig, seed: u64) -> Result<Self> {
        if cfg.max_centers == 0 || !(cfg.ridge > 0.0) {
            return Err(Error::invalid("kernel config", "max_centers and ridge must be positive"));
        }
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut rng::stream(seed, rng::tag::CENTERS));
        order.truncate(cfg.max_centers);
        order.sort_unstable();
        let centers = data.select(&order)?;
        let m = centers.len();
        let dim = data.dim();

        let bandwidth = match cfg.bandwidth {
            Some(g) => g,
            None => {
                let vals = centers.features();
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
                if var > 0.0 {
                    1.0 / (dim as f64 * var)
                } else {
                    1.0
                }
            }
        };

        let targets: Vec<f64> = centers.labels().iter().map(|&y| if y == 1 { 1.0 } else { -1.0 }).collect();
        let bias = targets.iter().sum::<f64>() / m as f64;
        let mut gram = alloc::vec![0.0; m * m];
        for i in 0..m {
            for j in 0..=i {
                let k = libm::exp(-bandwidth * sq_dist(centers.sample(i), centers.sample(j)));
                gram[i * m + j] = k;
                gram[j * m + i] = k;
            }
            gram[i * m + i] += cfg.ridge;
        }
        let rhs: Vec<f64> = targets.iter().map(|t| t - bias).collect();
        let coefficients = cholesky_solve(&mut gram, m, rhs)?;
        KernelModel::new(centers.features().to_vec(), dim, coefficients, bandwidth, bias)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Solves `A x = b` for symmetric positive definite `A`, overwriting `A`
/// with its Cholesky factor.
fn cholesky_solve(a: &mut [f64], n: usize, mut b: Vec<f64>) -> Result<Vec<f64>> {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > 0.0) {
            return Err(Error::invalid("kernel system", "matrix is not positive definite"));
        }
        let diag = libm::sqrt(diag);
        a[j * n + j] = diag;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / diag;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Ok(b)
}

impl Predictor for KernelModel {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        sigmoid(self.score(x))
    }
}
