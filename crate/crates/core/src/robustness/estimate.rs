use alloc::vec::Vec;

use super::curve::{check_grid, CurveKind, RobustnessCurve};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::explain::Attribution;
use crate::geometry::{distance_unchecked, NormOrder};
use crate::pairs::{sample_pairs, PairSamplePlan, PairSet};
use crate::predict::Predictor;

/// Fraction of pairs with `gap ≤ t · distance`, for each `t` in `grid`.
/// Pairs at distance zero have zero gap and always count.
fn satisfied_fractions(gaps: &[(f64, f64)], grid: &[f64]) -> Vec<f64> {
    let n = gaps.len() as f64;
    grid.iter().map(|&t| gaps.iter().filter(|&&(gap, dist)| gap <= t * dist).count() as f64 / n).collect()
}

/// Probabilistic Lipschitzness profile: for each `L`, the fraction of pairs
/// within the plan's radius with `|f(x) − f(x′)| ≤ L · ‖x − x′‖_p`.
pub fn estimate_plipschitz<F: Predictor + ?Sized>(
    f: &F,
    data: &Dataset,
    plan: &PairSamplePlan,
    ord: NormOrder,
    lipschitz_grid: &[f64],
) -> Result<RobustnessCurve> {
    check_grid(lipschitz_grid)?;
    let pairs = sample_pairs(data, plan, ord)?;
    plipschitz_on_pairs(f, data, &pairs, lipschitz_grid)
}

pub fn plipschitz_on_pairs<F: Predictor + ?Sized>(
    f: &F,
    data: &Dataset,
    pairs: &PairSet,
    lipschitz_grid: &[f64],
) -> Result<RobustnessCurve> {
    check_grid(lipschitz_grid)?;
    if f.input_dim() != data.dim() {
        return Err(Error::DimensionMismatch { expected: f.input_dim(), actual: data.dim() });
    }
    if pairs.is_empty() {
        return Err(Error::RadiusTooSmall { radius: pairs.radius });
    }
    let mut outputs = alloc::vec![0.0; data.len()];
    f.eval_batch(data.features(), &mut outputs);
    let gaps: Vec<(f64, f64)> =
        pairs.pairs.iter().map(|p| (libm::fabs(outputs[p.i] - outputs[p.j]), p.distance)).collect();
    RobustnessCurve::new(
        CurveKind::Lipschitzness,
        lipschitz_grid.to_vec(),
        satisfied_fractions(&gaps, lipschitz_grid),
        pairs.radius,
        pairs.ord,
        pairs.len(),
        "",
    )
}

/// Attributions looked up by sample index.
pub struct AttributionIndex<'a> {
    slots: Vec<Option<&'a Attribution>>,
}

impl<'a> AttributionIndex<'a> {
    pub fn new(attrs: &'a [Attribution], n_samples: usize) -> Self {
        let mut slots = alloc::vec![None; n_samples];
        for a in attrs {
            if let Some(slot) = slots.get_mut(a.sample_index) {
                *slot = Some(a);
            }
        }
        AttributionIndex { slots }
    }

    pub fn get(&self, i: usize) -> Result<&'a Attribution> {
        self.slots.get(i).copied().flatten().ok_or(Error::MissingAttribution(i))
    }
}

/// Explainer astuteness: for each `λ`, the fraction of pairs within the
/// plan's radius with `‖φ(x) − φ(x′)‖_p ≤ λ · ‖x − x′‖_p`.
pub fn estimate_astuteness(
    attrs: &[Attribution],
    data: &Dataset,
    plan: &PairSamplePlan,
    ord: NormOrder,
    lambda_grid: &[f64],
) -> Result<RobustnessCurve> {
    check_grid(lambda_grid)?;
    let pairs = sample_pairs(data, plan, ord)?;
    astuteness_on_pairs(attrs, data, &pairs, lambda_grid)
}

pub fn astuteness_on_pairs(
    attrs: &[Attribution],
    data: &Dataset,
    pairs: &PairSet,
    lambda_grid: &[f64],
) -> Result<RobustnessCurve> {
    check_grid(lambda_grid)?;
    if pairs.is_empty() {
        return Err(Error::RadiusTooSmall { radius: pairs.radius });
    }
    let index = AttributionIndex::new(attrs, data.len());
    let mut gaps = Vec::with_capacity(pairs.len());
    for p in &pairs.pairs {
        let (a, b) = (index.get(p.i)?, index.get(p.j)?);
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), actual: b.dim() });
        }
        gaps.push((distance_unchecked(&a.scores, &b.scores, pairs.ord), p.distance));
    }
    let subject = attrs.first().map(|a| a.explainer.name()).unwrap_or("");
    RobustnessCurve::new(
        CurveKind::Astuteness,
        lambda_grid.to_vec(),
        satisfied_fractions(&gaps, lambda_grid),
        pairs.radius,
        pairs.ord,
        pairs.len(),
        subject,
    )
}
