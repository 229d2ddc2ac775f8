use alloc::vec::Vec;

use super::check_input;
use crate::error::{Error, Result};
use crate::geometry::mask_into;
use crate::predict::Predictor;

const BATCH_ROWS: usize = 512;

/// `f(x ⊙ z)` for every mask `z ∈ {0,1}^d`, indexed by the mask's bit code.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactTable {
    dim: usize,
    values: Vec<f64>,
}

impl ExactTable {
    pub fn build<F: Predictor + ?Sized>(f: &F, x: &[f64], cutoff: usize) -> Result<Self> {
        check_input(f, x)?;
        let dim = x.len();
        if dim > cutoff || dim >= 63 {
            return Err(Error::TooManyFeatures { dim, cutoff });
        }
        let total = 1usize << dim;
        let mut values = alloc::vec![0.0; total];
        let mut rows = alloc::vec![0.0; BATCH_ROWS.min(total) * dim];
        for (chunk, out) in values.chunks_mut(BATCH_ROWS).enumerate() {
            let start = chunk * BATCH_ROWS;
            for (r, row) in rows.chunks_exact_mut(dim).take(out.len()).enumerate() {
                mask_into(x, (start + r) as u64, row);
            }
            f.eval_batch(&rows[..out.len() * dim], out);
        }
        Ok(ExactTable { dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn evaluations(&self) -> usize {
        self.values.len()
    }

    /// `f(x ⊙ z)` for the mask with bit code `code`.
    pub fn value(&self, code: usize) -> f64 {
        self.values[code]
    }

    pub fn full(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn empty(&self) -> f64 {
        self.values[0]
    }

    /// Exact Shapley values.
    pub fn shapley(&self) -> Vec<f64> {
        let d = self.dim;
        let weights: Vec<f64> = (0..d).map(|k| super::shapley::weight_unchecked(k, d)).collect();
        let mut phi = alloc::vec![0.0; d];
        for (code, &without) in self.values.iter().enumerate() {
            let w = weights.get(code.count_ones() as usize).copied().unwrap_or(0.0);
            for (i, p) in phi.iter_mut().enumerate() {
                let bit = 1usize << i;
                if code & bit == 0 {
                    *p += w * (self.values[code | bit] - without);
                }
            }
        }
        phi
    }

    /// Exact RISE attributions for independent Bernoulli(`inclusion_prob`) masks.
    pub fn rise(&self, inclusion_prob: f64) -> Vec<f64> {
        let d = self.dim;
        // weight of a mask with k kept features given that bit i is kept
        let weights: Vec<f64> = (0..=d)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    libm::pow(inclusion_prob, (k - 1) as f64) * libm::pow(1.0 - inclusion_prob, (d - k) as f64)
                }
            })
            .collect();
        let mut phi = alloc::vec![0.0; d];
        for (code, &v) in self.values.iter().enumerate() {
            let w = weights[code.count_ones() as usize] * v;
            for (i, p) in phi.iter_mut().enumerate() {
                if code >> i & 1 == 1 {
                    *p += w;
                }
            }
        }
        phi
    }

    /// `f(x) − f(x ⊙ z_{−i})`.
    pub fn remove_individual(&self) -> Vec<f64> {
        let full = self.values.len() - 1;
        (0..self.dim).map(|i| self.values[full] - self.values[full & !(1usize << i)]).collect()
    }
}
