//! Worst-case share of Lipschitz violations surviving masking.
//!
//! Given `p_k`, the mass of points with exactly `k` nonzero coordinates, and
//! a violation budget `α`, the worst case is
//!
//! ```text
//! β* = max_γ  Σ_k 2^{−k} p_k γ_k / Σ_j 2^{−j} p_j
//!      s.t.   Σ_k p_k γ_k = α,  0 ≤ γ_k ≤ 1.
//! ```
//!
//! This is a fractional knapsack: item `k` has weight `p_k` and value
//! `2^{−k} p_k`, so its value density `2^{−k}` is highest for small `k`. The
//! greedy fills `γ_1, γ_2, …` in that order.

use alloc::vec::Vec;

use crate::error::{Error, Result};

const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BetaStarProblem {
    /// `p[k - 1]` is the mass with `k` nonzero coordinates.
    pub p: Vec<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BetaStar {
    pub beta: f64,
    pub gamma: Vec<f64>,
}

impl BetaStarProblem {
    pub fn new(p: Vec<f64>, alpha: f64) -> Result<Self> {
        let prob = BetaStarProblem { p, alpha };
        prob.validate()?;
        Ok(prob)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.is_empty() {
            return Err(Error::invalid("p", "must have at least one entry"));
        }
        if self.p.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("p", "entries must be finite and nonnegative"));
        }
        let total = self.total_mass();
        if total > 1.0 + MASS_TOLERANCE {
            return Err(Error::invalid("p", alloc::format!("total mass {total} exceeds 1")));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid("alpha", alloc::format!("must lie in [0, 1], got {}", self.alpha)));
        }
        if self.alpha > total + MASS_TOLERANCE {
            return Err(Error::Infeasible { alpha: self.alpha, total });
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.p.iter().sum()
    }

    fn density(k_index: usize) -> f64 {
        libm::exp2(-((k_index + 1) as f64))
    }

    /// Objective value at `gamma`; 0 when every `p_k` is zero.
    pub fn objective(&self, gamma: &[f64]) -> f64 {
        let denom: f64 = self.p.iter().enumerate().map(|(k, &p)| Self::density(k) * p).sum();
        if denom == 0.0 {
            return 0.0;
        }
        let num: f64 = self.p.iter().zip(gamma).enumerate().map(|(k, (&p, &g))| Self::density(k) * p * g).sum();
        num / denom
    }

    /// `Σ_k p_k γ_k`.
    pub fn spent(&self, gamma: &[f64]) -> f64 {
        self.p.iter().zip(gamma).map(|(p, g)| p * g).sum()
    }
}

/// Greedy optimum of the knapsack, filling ascending `k` (descending value
/// density, ties impossible since densities are distinct).
pub fn beta_star(prob: &BetaStarProblem) -> Result<BetaStar> {
    prob.validate()?;
    let mut gamma = alloc::vec![0.0; prob.p.len()];
    let mut remaining = prob.alpha;
    for (g, &p) in gamma.iter_mut().zip(&prob.p) {
        if remaining <= 0.0 {
            break;
        }
        if p == 0.0 {
            continue;
        }
        let take = if remaining >= p * (1.0 - MASS_TOLERANCE) { 1.0 } else { remaining / p };
        *g = take;
        remaining -= take * p;
    }
    Ok(BetaStar { beta: prob.objective(&gamma).min(1.0), gamma })
}

/// Brute-force check of [`beta_star`]: the best objective over the grid
/// `γ ∈ {0, h, 2h, …, 1}^d` among points whose budget is within
/// `h · max(p)` of `α`. Supports `d ≤ 4`.
///
/// The objective is nondecreasing in the last coordinate, so for each
/// setting of the first `d − 1` coordinates only the largest feasible grid
/// value of the last needs checking; the result equals the full scan.
pub fn beta_star_oracle(prob: &BetaStarProblem, resolution: f64) -> Result<f64> {
    prob.validate()?;
    let d = prob.p.len();
    if d > 4 {
        return Err(Error::invalid("oracle dimension", alloc::format!("grid search supports d <= 4, got {d}")));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::invalid("resolution", "must lie in (0, 1]"));
    }
    let steps = libm::round(1.0 / resolution) as usize;
    let h = 1.0 / steps as f64;
    let tol = h * prob.p.iter().copied().fold(0.0, f64::max);
    let mut gamma = alloc::vec![0.0; d];
    let mut best: Option<f64> = None;
    search(prob, steps, tol, 0, 0.0, &mut gamma, &mut best);
    best.ok_or(Error::NoFeasiblePoint)
}

fn search(
    prob: &BetaStarProblem,
    steps: usize,
    tol: f64,
    k: usize,
    spent: f64,
    gamma: &mut [f64],
    best: &mut Option<f64>,
) {
    let d = gamma.len();
    let p = prob.p[k];
    if k + 1 == d {
        let chosen = if p == 0.0 {
            (libm::fabs(spent - prob.alpha) <= tol).then_some(steps)
        } else {
            let upper = (prob.alpha + tol - spent) / p;
            let lower = (prob.alpha - tol - spent) / p;
            if upper < 0.0 {
                None
            } else {
                let idx = (libm::floor(upper * steps as f64 + 1e-9) as usize).min(steps);
                let g = idx as f64 / steps as f64;
                (g >= lower - 1e-12 && libm::fabs(spent + p * g - prob.alpha) <= tol + 1e-12).then_some(idx)
            }
        };
        if let Some(idx) = chosen {
            gamma[k] = idx as f64 / steps as f64;
            let value = prob.objective(gamma);
            if best.map_or(true, |b| value > b) {
                *best = Some(value);
            }
        }
        return;
    }
    for idx in 0..=steps {
        let g = idx as f64 / steps as f64;
        let next = spent + p * g;
        if next > prob.alpha + tol + 1e-12 {
            break;
        }
        gamma[k] = g;
        search(prob, steps, tol, k + 1, next, gamma, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn empty_budget() {
        let prob = BetaStarProblem::new(vec![0.3, 0.5, 0.1], 0.0).unwrap();
        let sol = beta_star(&prob).unwrap();
        assert_eq!(sol.beta, 0.0);
        assert_eq!(sol.gamma, vec![0.0; 3]);
        // the budget band admits small positive γ, so the oracle is only near 0
        let oracle = beta_star_oracle(&prob, 1e-3).unwrap();
        assert!((0.0..=5e-3).contains(&oracle), "{oracle}");
    }

    #[test]
    fn full_budget_saturates() {
        let prob = BetaStarProblem::new(vec![0.2, 0.3, 0.5], 1.0).unwrap();
        let sol = beta_star(&prob).unwrap();
        assert_eq!(sol.gamma, vec![1.0; 3]);
        assert!((sol.beta - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_classes() {
        let prob = BetaStarProblem::new(vec![0.5, 0.5], 0.5).unwrap();
        let sol = beta_star(&prob).unwrap();
        assert_eq!(sol.gamma, vec![1.0, 0.0]);
        assert!((sol.beta - 2.0 / 3.0).abs() < 1e-15);
        assert!((beta_star_oracle(&prob, 1e-3).unwrap() - 2.0 / 3.0).abs() < 5e-3);
    }

    #[test]
    fn largest_mass_first_is_not_optimal() {
        // filling the largest p_k (k = 2) first would give β = 0.5 · 0.25 / 0.325
        let prob = BetaStarProblem::new(vec![0.1, 0.6], 0.1).unwrap();
        let sol = beta_star(&prob).unwrap();
        assert_eq!(sol.gamma, vec![1.0, 0.0]);
        let by_largest = prob.objective(&[0.0, 1.0 / 6.0]);
        assert!(sol.beta > by_largest);
        assert!((beta_star_oracle(&prob, 1e-3).unwrap() - sol.beta).abs() < 5e-3);
    }

    #[test]
    fn single_class_limit() {
        for alpha in [0.0, 0.2, 0.75, 1.0] {
            let prob = BetaStarProblem::new(vec![1.0, 0.0], alpha).unwrap();
            assert!((beta_star(&prob).unwrap().beta - alpha).abs() < 1e-15);
            assert!((beta_star_oracle(&prob, 1e-3).unwrap() - alpha).abs() < 5e-3);
        }
    }

    #[test]
    fn infeasible_and_invalid() {
        assert_eq!(BetaStarProblem::new(vec![0.1, 0.1], 0.5), Err(Error::Infeasible { alpha: 0.5, total: 0.2 }));
        assert!(BetaStarProblem::new(vec![0.7, 0.7], 0.1).is_err());
        assert!(BetaStarProblem::new(vec![-0.1], 0.0).is_err());
        let big = BetaStarProblem::new(vec![0.1; 5], 0.1).unwrap();
        assert!(beta_star_oracle(&big, 0.1).is_err());
    }
}
