//! Removal-based explainers.
//!
//! All three replace removed features with zero and attribute the scalar
//! model output:
//!
//! - Shapley: `φ_i = Σ_{S ⊆ [d]∖{i}} |S|!(d−|S|−1)!/d! · [f(x⊙z_{S∪i}) − f(x⊙z_S)]`
//! - RISE: `φ_i = E[f(x⊙z) | z_i = 1]`, `z_j ~ Bernoulli(p)` independently
//! - remove-individual: `φ_i = f(x) − f(x⊙z_{−i})`

mod removal;
mod rise;
mod shapley;
mod table;

use alloc::vec::Vec;
use core::fmt;

pub use removal::remove_individual;
pub use rise::{rise, RiseConfig};
pub use shapley::{shap_exact, shap_exact_with_cutoff, shap_sampled, shapley_weight};
pub use table::ExactTable;

use crate::error::{Error, Result};
use crate::predict::Predictor;

/// Largest dimension for which explainers enumerate all `2^d` masks.
pub const DEFAULT_EXACT_CUTOFF: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ExplainerKind {
    Shap,
    Rise,
    RemoveIndividual,
}

impl ExplainerKind {
    pub const ALL: [ExplainerKind; 3] = [ExplainerKind::Shap, ExplainerKind::Rise, ExplainerKind::RemoveIndividual];

    pub fn name(self) -> &'static str {
        match self {
            ExplainerKind::Shap => "shap",
            ExplainerKind::Rise => "rise",
            ExplainerKind::RemoveIndividual => "remove_individual",
        }
    }

    /// The constant `C` in `λ = C · L · d^(1/p)`.
    pub fn bound_constant(self) -> f64 {
        match self {
            ExplainerKind::Shap | ExplainerKind::RemoveIndividual => 2.0,
            ExplainerKind::Rise => 1.0,
        }
    }
}

impl fmt::Display for ExplainerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for ExplainerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExplainerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid("explainer", alloc::format!("unknown explainer {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttributionMeta {
    /// Model evaluations spent on this sample.
    pub evaluations: usize,
    /// Permutations or masks drawn per feature; 0 for exact computation.
    pub n_masks: usize,
    pub seed: Option<u64>,
    pub exact: bool,
    /// Per-feature standard errors of sampled estimates.
    pub std_errors: Option<Vec<f64>>,
}

/// Attribution vector `φ(x)` for one sample.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Attribution {
    pub scores: Vec<f64>,
    pub explainer: ExplainerKind,
    pub sample_index: usize,
    pub meta: AttributionMeta,
}

impl Attribution {
    pub fn with_index(mut self, sample_index: usize) -> Self {
        self.sample_index = sample_index;
        self
    }

    pub fn dim(&self) -> usize {
        self.scores.len()
    }
}

#[cfg(feature = "serde")]
fn default_cutoff() -> usize {
    DEFAULT_EXACT_CUTOFF
}

#[cfg(feature = "serde")]
fn default_permutations() -> usize {
    1000
}

/// A configured explainer.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "method", rename_all = "snake_case"))]
pub enum Explainer {
    ShapExact {
        #[cfg_attr(feature = "serde", serde(default = "default_cutoff"))]
        cutoff: usize,
    },
    ShapSampled {
        #[cfg_attr(feature = "serde", serde(default = "default_permutations"))]
        permutations: usize,
        #[cfg_attr(feature = "serde", serde(default))]
        seed: u64,
    },
    RemoveIndividual,
    Rise(RiseConfig),
}

impl Explainer {
    pub fn shap_exact() -> Self {
        Explainer::ShapExact { cutoff: DEFAULT_EXACT_CUTOFF }
    }

    pub fn rise_exact() -> Self {
        Explainer::Rise(RiseConfig::default())
    }

    /// Default exact configuration of each kind.
    pub fn exact(kind: ExplainerKind) -> Self {
        match kind {
            ExplainerKind::Shap => Explainer::shap_exact(),
            ExplainerKind::Rise => Explainer::rise_exact(),
            ExplainerKind::RemoveIndividual => Explainer::RemoveIndividual,
        }
    }

    pub fn kind(&self) -> ExplainerKind {
        match self {
            Explainer::ShapExact { .. } | Explainer::ShapSampled { .. } => ExplainerKind::Shap,
            Explainer::RemoveIndividual => ExplainerKind::RemoveIndividual,
            Explainer::Rise(_) => ExplainerKind::Rise,
        }
    }

    pub fn is_exact(&self) -> bool {
        match self {
            Explainer::ShapExact { .. } | Explainer::RemoveIndividual => true,
            Explainer::ShapSampled { .. } => false,
            Explainer::Rise(cfg) => cfg.exact,
        }
    }

    /// Explains `x`, seeding any sampling from `(seed, sample_index)`.
    pub fn explain<F: Predictor + ?Sized>(&self, f: &F, x: &[f64], sample_index: usize) -> Result<Attribution> {
        let attr = match *self {
            Explainer::ShapExact { cutoff } => shap_exact_with_cutoff(f, x, cutoff)?,
            Explainer::ShapSampled { permutations, seed } => shap_sampled(f, x, permutations, seed, sample_index)?,
            Explainer::RemoveIndividual => remove_individual(f, x)?,
            Explainer::Rise(cfg) => rise(f, x, &cfg, sample_index)?,
        };
        Ok(attr.with_index(sample_index))
    }
}

pub(crate) fn check_input<F: Predictor + ?Sized>(f: &F, x: &[f64]) -> Result<()> {
    if x.len() != f.input_dim() {
        return Err(Error::DimensionMismatch { expected: f.input_dim(), actual: x.len() });
    }
    Ok(())
}

/// Mean and standard error from running sums.
pub(crate) fn mean_and_se(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, libm::sqrt(var / nf))
}

/// Explains every sample of `data` with each explainer. Exact explainers on
/// the same sample share one table of masked evaluations.
pub fn explain_dataset<F: Predictor + ?Sized>(
    explainers: &[Explainer],
    f: &F,
    data: &crate::dataset::Dataset,
) -> Result<Vec<Vec<Attribution>>> {
    let mut out: Vec<Vec<Attribution>> = explainers.iter().map(|_| Vec::with_capacity(data.len())).collect();
    for (i, x) in data.samples().enumerate() {
        for (attr, slot) in explain_sample(explainers, f, x, i)?.into_iter().zip(&mut out) {
            slot.push(attr);
        }
    }
    Ok(out)
}

/// All `explainers` on one sample, sharing the exact table where possible.
pub fn explain_sample<F: Predictor + ?Sized>(
    explainers: &[Explainer],
    f: &F,
    x: &[f64],
    sample_index: usize,
) -> Result<Vec<Attribution>> {
    let shared_cutoff = explainers
        .iter()
        .filter_map(|e| match e {
            Explainer::ShapExact { cutoff } => Some(*cutoff),
            Explainer::Rise(cfg) if cfg.exact => Some(cfg.exact_cutoff),
            _ => None,
        })
        .min();
    let table = match shared_cutoff {
        Some(cutoff) if x.len() <= cutoff => Some(ExactTable::build(f, x, cutoff)?),
        _ => None,
    };
    explainers
        .iter()
        .map(|e| {
            let from_table = |scores: Vec<f64>, evaluations: usize| Attribution {
                scores,
                explainer: e.kind(),
                sample_index,
                meta: AttributionMeta { evaluations, exact: true, ..Default::default() },
            };
            match (e, &table) {
                (Explainer::ShapExact { .. }, Some(t)) => Ok(from_table(t.shapley(), t.evaluations())),
                (Explainer::Rise(cfg), Some(t)) if cfg.exact => {
                    cfg.validate()?;
                    Ok(from_table(t.rise(cfg.inclusion_prob), t.evaluations()))
                }
                _ => e.explain(f, x, sample_index),
            }
        })
        .collect()
}
