//! Robustness analysis for removal-based feature attributions.
//!
//! The crate estimates how likely a predictor is to be locally Lipschitz
//! (probabilistic Lipschitzness), how likely an explainer is to give close
//! attributions to close inputs (astuteness), and the lower bound on the
//! latter implied by the former:
//!
//! ```text
//! P[ ‖φ(x) − φ(x′)‖_p ≤ λ ‖x − x′‖_p | ‖x − x′‖_p ≤ r ]  ≥  1 − α
//!     for λ = C · L · d^(1/p),   C = 2 (Shapley, remove-individual), 1 (RISE)
//! ```
//!
//! where `1 − α` is the probability that `|f(x) − f(x′)| ≤ L ‖x − x′‖_p` on
//! the same pairs. Everything here is `no_std` + `alloc`; file formats and
//! the command line live in the `astute` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod explain;
pub mod generate;
pub mod geometry;
pub mod pairs;
pub mod predict;
pub mod rng;
pub mod robustness;

pub use dataset::{Dataset, FeatureScaler};
pub use error::{Error, Result};
pub use geometry::{apply_mask, distance, Mask, NormOrder};
pub use pairs::{median_pairwise_distance, sample_pairs, Pair, PairMode, PairSamplePlan, PairSet};
pub use predict::{Model, Predictor};
