//! Probabilistic Lipschitzness, explainer astuteness, and the lower bound
//! connecting them.

mod auc;
mod beta;
mod bound;
mod curve;
mod estimate;
mod verify;

pub use auc::{auc, auc_gap};
pub use beta::{beta_star, beta_star_oracle, BetaStar, BetaStarProblem};
pub use bound::{predict_bound, BoundSpec};
pub use curve::{default_lambda_grid, default_lipschitz_grid, linear_grid, CurveKind, RobustnessCurve};
pub use estimate::{
    astuteness_on_pairs, estimate_astuteness, estimate_plipschitz, plipschitz_on_pairs, AttributionIndex,
};
pub use verify::{verify_theorem, verify_with_lipschitz, TheoremReport};
