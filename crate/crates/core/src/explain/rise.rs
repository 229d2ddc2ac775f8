use alloc::vec::Vec;

use rand::Rng;

use super::table::ExactTable;
use super::{check_input, mean_and_se, Attribution, AttributionMeta, ExplainerKind, DEFAULT_EXACT_CUTOFF};
use crate::error::{Error, Result};
use crate::predict::Predictor;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct RiseConfig {
    /// Probability that a feature is kept in a random mask.
    pub inclusion_prob: f64,
    /// Masks drawn per feature in sampled mode.
    pub n_masks: usize,
    /// Enumerate every mask instead of sampling.
    pub exact: bool,
    pub exact_cutoff: usize,
    pub seed: u64,
}

impl Default for RiseConfig {
    fn default() -> Self {
        RiseConfig { inclusion_prob: 0.5, n_masks: 1000, exact: true, exact_cutoff: DEFAULT_EXACT_CUTOFF, seed: 0 }
    }
}

impl RiseConfig {
    pub fn sampled(n_masks: usize, seed: u64) -> Self {
        RiseConfig { n_masks, exact: false, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.inclusion_prob > 0.0 && self.inclusion_prob < 1.0) {
            return Err(Error::invalid(
                "inclusion_prob",
                alloc::format!("must lie in (0, 1), got {}", self.inclusion_prob),
            ));
        }
        if !self.exact && self.n_masks == 0 {
            return Err(Error::invalid("n_masks", "must be at least 1"));
        }
        Ok(())
    }
}

const ROWS_PER_BATCH: usize = 256;

/// `φ_i = E[f(x ⊙ z) | z_i = 1]` with independent Bernoulli masks, either
/// enumerated exactly or estimated from `n_masks` draws per feature.
pub fn rise<F: Predictor + ?Sized>(f: &F, x: &[f64], cfg: &RiseConfig, sample_index: usize) -> Result<Attribution> {
    cfg.validate()?;
    check_input(f, x)?;
    if cfg.exact {
        let table = ExactTable::build(f, x, cfg.exact_cutoff)?;
        return Ok(Attribution {
            scores: table.rise(cfg.inclusion_prob),
            explainer: ExplainerKind::Rise,
            sample_index,
            meta: AttributionMeta { evaluations: table.evaluations(), exact: true, ..Default::default() },
        });
    }

    let d = x.len();
    let mut rng = rng::stream(cfg.seed, sample_index as u64);
    let mut rows = alloc::vec![0.0; ROWS_PER_BATCH * d];
    let mut out = alloc::vec![0.0; ROWS_PER_BATCH];
    let mut scores = Vec::with_capacity(d);
    let mut errors = Vec::with_capacity(d);
    for i in 0..d {
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        let mut done = 0;
        while done < cfg.n_masks {
            let batch = ROWS_PER_BATCH.min(cfg.n_masks - done);
            for row in rows.chunks_exact_mut(d).take(batch) {
                for (j, (r, &v)) in row.iter_mut().zip(x).enumerate() {
                    *r = if j == i || rng.random_bool(cfg.inclusion_prob) { v } else { 0.0 };
                }
            }
            f.eval_batch(&rows[..batch * d], &mut out[..batch]);
            for &v in &out[..batch] {
                sum += v;
                sum_sq += v * v;
            }
            done += batch;
        }
        let (mean, se) = mean_and_se(sum, sum_sq, cfg.n_masks);
        scores.push(mean);
        errors.push(se);
    }
    Ok(Attribution {
        scores,
        explainer: ExplainerKind::Rise,
        sample_index,
        meta: AttributionMeta {
            evaluations: d * cfg.n_masks,
            n_masks: cfg.n_masks,
            seed: Some(cfg.seed),
            exact: false,
            std_errors: Some(errors),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predict::FnPredictor;
    use alloc::vec;

    #[test]
    fn raw_linear_head() {
        let f = FnPredictor::new(2, |x: &[f64]| x[0] + 2.0 * x[1]);
        let a = rise(&f, &[3.0, 4.0], &RiseConfig::default(), 0).unwrap();
        assert_eq!(a.scores, vec![7.0, 9.5]);
    }

    #[test]
    fn constant_gives_constant() {
        let f = FnPredictor::new(3, |_: &[f64]| 0.4);
        let exact = rise(&f, &[1.0, 2.0, 3.0], &RiseConfig::default(), 0).unwrap();
        assert!(exact.scores.iter().all(|&s| (s - 0.4).abs() < 1e-15));
        let sampled = rise(&f, &[1.0, 2.0, 3.0], &RiseConfig::sampled(50, 1), 0).unwrap();
        assert!(sampled.scores.iter().all(|&s| (s - 0.4).abs() < 1e-15));
    }

    #[test]
    fn uneven_inclusion_probability() {
        // E[x0 z0 + 2 x1 z1 | z0 = 1] = 3 + 0.25 · 8
        let f = FnPredictor::new(2, |x: &[f64]| x[0] + 2.0 * x[1]);
        let cfg = RiseConfig { inclusion_prob: 0.25, ..Default::default() };
        let a = rise(&f, &[3.0, 4.0], &cfg, 0).unwrap();
        assert!((a.scores[0] - 5.0).abs() < 1e-12);
        assert!((a.scores[1] - 8.75).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs() {
        let f = FnPredictor::new(1, |_: &[f64]| 0.0);
        let bad = RiseConfig { inclusion_prob: 1.0, ..Default::default() };
        assert!(rise(&f, &[1.0], &bad, 0).is_err());
        assert!(rise(&f, &[1.0], &RiseConfig::sampled(0, 0), 0).is_err());
        let tight = RiseConfig { exact_cutoff: 2, ..Default::default() };
        assert!(rise(&FnPredictor::new(3, |_: &[f64]| 0.0), &[0.0; 3], &tight, 0).is_err());
    }

    #[test]
    fn sampled_reproducible() {
        let f = FnPredictor::new(3, |x: &[f64]| x[0] * x[1] - x[2]);
        let cfg = RiseConfig::sampled(200, 3);
        let a = rise(&f, &[1.0, 2.0, 3.0], &cfg, 5).unwrap();
        assert_eq!(a, rise(&f, &[1.0, 2.0, 3.0], &cfg, 5).unwrap());
        assert_ne!(a.scores, rise(&f, &[1.0, 2.0, 3.0], &cfg, 6).unwrap().scores);
    }
}
