use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::table::ExactTable;
use super::{check_input, mean_and_se, Attribution, AttributionMeta, ExplainerKind, DEFAULT_EXACT_CUTOFF};
use crate::error::{Error, Result};
use crate::predict::Predictor;
use crate::rng;

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| libm::log(k as f64)).sum()
}

/// Shapley coefficient `k!(d−k−1)!/d!` of a coalition of size `k` not
/// containing the feature being scored.
pub fn shapley_weight(k: usize, d: usize) -> Result<f64> {
    if d == 0 || k >= d {
        return Err(Error::invalid("coalition size", alloc::format!("need 0 <= k < d, got k = {k}, d = {d}")));
    }
    Ok(weight_unchecked(k, d))
}

pub(crate) fn weight_unchecked(k: usize, d: usize) -> f64 {
    libm::exp(ln_factorial(k) + ln_factorial(d - k - 1) - ln_factorial(d))
}

/// Exact Shapley values by enumerating all `2^d` coalitions.
pub fn shap_exact<F: Predictor + ?Sized>(f: &F, x: &[f64]) -> Result<Attribution> {
    shap_exact_with_cutoff(f, x, DEFAULT_EXACT_CUTOFF)
}

pub fn shap_exact_with_cutoff<F: Predictor + ?Sized>(f: &F, x: &[f64], cutoff: usize) -> Result<Attribution> {
    let table = ExactTable::build(f, x, cutoff)?;
    Ok(Attribution {
        scores: table.shapley(),
        explainer: ExplainerKind::Shap,
        sample_index: 0,
        meta: AttributionMeta { evaluations: table.evaluations(), exact: true, ..Default::default() },
    })
}

const PERMUTATIONS_PER_BATCH: usize = 64;

/// Monte-Carlo Shapley values from `permutations` random feature orderings.
///
/// Each ordering adds features one at a time starting from the all-removed
/// input and credits every feature with its marginal change, so each
/// permutation's contributions sum exactly to `f(x) − f(0)`. Standard errors
/// are recorded in the attribution metadata.
pub fn shap_sampled<F: Predictor + ?Sized>(
    f: &F,
    x: &[f64],
    permutations: usize,
    seed: u64,
    sample_index: usize,
) -> Result<Attribution> {
    check_input(f, x)?;
    if permutations == 0 {
        return Err(Error::invalid("permutations", "must be at least 1"));
    }
    let d = x.len();
    let mut rng = rng::stream(seed, sample_index as u64);
    let base = f.eval(&alloc::vec![0.0; d]);
    let mut order: Vec<usize> = (0..d).collect();
    let mut orders: Vec<usize> = Vec::with_capacity(PERMUTATIONS_PER_BATCH * d);
    let mut rows = alloc::vec![0.0; PERMUTATIONS_PER_BATCH * d * d];
    let mut out = alloc::vec![0.0; PERMUTATIONS_PER_BATCH * d];
    let (mut sum, mut sum_sq) = (alloc::vec![0.0; d], alloc::vec![0.0; d]);

    let mut done = 0;
    while done < permutations {
        let batch = PERMUTATIONS_PER_BATCH.min(permutations - done);
        orders.clear();
        for b in 0..batch {
            order.shuffle(&mut rng);
            orders.extend_from_slice(&order);
            // row s of this permutation keeps its first s + 1 features
            let block = &mut rows[b * d * d..(b + 1) * d * d];
            let mut current = alloc::vec![0.0; d];
            for (s, &feat) in order.iter().enumerate() {
                current[feat] = x[feat];
                block[s * d..(s + 1) * d].copy_from_slice(&current);
            }
        }
        f.eval_batch(&rows[..batch * d * d], &mut out[..batch * d]);
        for b in 0..batch {
            let mut prev = base;
            for s in 0..d {
                let v = out[b * d + s];
                let delta = v - prev;
                let feat = orders[b * d + s];
                sum[feat] += delta;
                sum_sq[feat] += delta * delta;
                prev = v;
            }
        }
        done += batch;
    }

    let (scores, errors): (Vec<f64>, Vec<f64>) =
        sum.iter().zip(&sum_sq).map(|(&s, &q)| mean_and_se(s, q, permutations)).unzip();
    Ok(Attribution {
        scores,
        explainer: ExplainerKind::Shap,
        sample_index,
        meta: AttributionMeta {
            evaluations: permutations * d + 1,
            n_masks: permutations,
            seed: Some(seed),
            exact: false,
            std_errors: Some(errors),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predict::{FnPredictor, LinearModel, Predictor};
    use alloc::vec;

    fn binomial(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
    }

    #[test]
    fn weight_examples() {
        assert_eq!(shapley_weight(0, 1).unwrap(), 1.0);
        assert!((shapley_weight(1, 3).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(shapley_weight(3, 3).is_err());
        for d in [1usize, 4, 10, 25] {
            let total: f64 = (0..d).map(|k| binomial(d - 1, k) * shapley_weight(k, d).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-12, "d = {d}: {total}");
        }
    }

    #[test]
    fn raw_linear_head_is_additive() {
        let f = FnPredictor::new(2, |x: &[f64]| x[0] + 2.0 * x[1]);
        let a = shap_exact(&f, &[3.0, 4.0]).unwrap();
        assert_eq!(a.scores, vec![3.0, 8.0]);
        assert_eq!(a.meta.evaluations, 4);
    }

    #[test]
    fn sigmoid_linear_efficiency() {
        let m = LinearModel::new(vec![1.0, 2.0], 0.0).unwrap();
        let a = shap_exact(&m, &[3.0, 4.0]).unwrap();
        let total: f64 = a.scores.iter().sum();
        assert!((total - (m.eval(&[3.0, 4.0]) - 0.5)).abs() < 1e-15);
        assert!((total - 0.49998).abs() < 1e-5);
    }

    #[test]
    fn constant_function_gets_zero() {
        let f = FnPredictor::new(3, |_: &[f64]| 0.7);
        assert_eq!(shap_exact(&f, &[1.0, 2.0, 3.0]).unwrap().scores, vec![0.0; 3]);
        assert_eq!(shap_sampled(&f, &[1.0, 2.0, 3.0], 1, 5, 0).unwrap().scores, vec![0.0; 3]);
    }

    #[test]
    fn cutoff_is_enforced() {
        let f = FnPredictor::new(21, |_: &[f64]| 0.0);
        assert_eq!(
            shap_exact(&f, &[0.0; 21]).unwrap_err(),
            Error::TooManyFeatures { dim: 21, cutoff: DEFAULT_EXACT_CUTOFF }
        );
    }

    #[test]
    fn sampled_is_reproducible_and_efficient() {
        let f = FnPredictor::new(4, |x: &[f64]| (x[0] * x[1] + x[2]).tanh() + x[3] * x[3]);
        let x = [0.5, -1.0, 2.0, 0.3];
        let a = shap_sampled(&f, &x, 37, 9, 2).unwrap();
        assert_eq!(a, shap_sampled(&f, &x, 37, 9, 2).unwrap());
        assert_ne!(a.scores, shap_sampled(&f, &x, 37, 10, 2).unwrap().scores);
        let total: f64 = a.scores.iter().sum();
        assert!((total - (f.eval(&x) - f.eval(&[0.0; 4]))).abs() < 1e-12);
        assert_eq!(a.meta.std_errors.as_ref().unwrap().len(), 4);
    }

    #[test]
    fn sampled_additive_game_is_exact() {
        // every permutation credits w_i x_i, so the estimate has zero variance
        let f = FnPredictor::new(3, |x: &[f64]| x[0] - 2.0 * x[1] + 0.5 * x[2]);
        let a = shap_sampled(&f, &[1.0, 1.0, 4.0], 100, 1, 0).unwrap();
        for (s, e) in a.scores.iter().zip([1.0, -2.0, 2.0]) {
            assert!((s - e).abs() < 1e-12);
        }
        assert!(a.meta.std_errors.unwrap().iter().all(|&s| s < 1e-12));
    }
}
