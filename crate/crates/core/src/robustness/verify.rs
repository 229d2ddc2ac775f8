use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::explain::{Explainer, ExplainerKind};
use crate::geometry::{distance_unchecked, NormOrder};
use crate::pairs::{sample_pairs, PairSamplePlan};
use crate::predict::{Model, Predictor};

/// Outcome of checking `‖φ(x) − φ(x′)‖_p ≤ C · L · d^(1/p) · ‖x − x′‖_p` on
/// every qualifying pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TheoremReport {
    pub explainer: ExplainerKind,
    pub violations: usize,
    /// Largest `‖φ(x) − φ(x′)‖_p / ‖x − x′‖_p` over pairs at positive distance.
    pub max_ratio: f64,
    /// `C · L · d^(1/p)`.
    pub bound: f64,
    pub lipschitz: f64,
    pub constant: f64,
    pub n_pairs: usize,
}

/// Verifies the deterministic astuteness guarantee for a model with a
/// closed-form Lipschitz constant.
pub fn verify_theorem(
    explainer: &Explainer,
    model: &Model,
    data: &Dataset,
    plan: &PairSamplePlan,
    ord: NormOrder,
) -> Result<TheoremReport> {
    let lipschitz = model.require_lipschitz_upper(ord)?;
    verify_with_lipschitz(explainer, model, lipschitz, data, plan, ord)
}

/// As [`verify_theorem`] for any predictor known to be `lipschitz`-Lipschitz.
pub fn verify_with_lipschitz<F: Predictor + ?Sized>(
    explainer: &Explainer,
    f: &F,
    lipschitz: f64,
    data: &Dataset,
    plan: &PairSamplePlan,
    ord: NormOrder,
) -> Result<TheoremReport> {
    if !explainer.is_exact() {
        return Err(Error::invalid("explainer", "theorem verification needs an exact explainer"));
    }
    if !(lipschitz >= 0.0) {
        return Err(Error::invalid("lipschitz constant", "must be nonnegative"));
    }
    let pairs = sample_pairs(data, plan, ord)?;
    let attrs: Vec<Vec<f64>> =
        data.samples().enumerate().map(|(i, x)| explainer.explain(f, x, i).map(|a| a.scores)).collect::<Result<_>>()?;
    let kind = explainer.kind();
    let constant = kind.bound_constant();
    let bound = constant * lipschitz * ord.dim_factor(data.dim());
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    for p in &pairs.pairs {
        let gap = distance_unchecked(&attrs[p.i], &attrs[p.j], ord);
        if gap > bound * p.distance {
            violations += 1;
        }
        if p.distance > 0.0 {
            max_ratio = max_ratio.max(gap / p.distance);
        }
    }
    Ok(TheoremReport { explainer: kind, violations, max_ratio, bound, lipschitz, constant, n_pairs: pairs.len() })
}
