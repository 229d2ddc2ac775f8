use alloc::vec::Vec;

use super::curve::{check_grid, CurveKind, RobustnessCurve};
use crate::error::{Error, Result};
use crate::explain::ExplainerKind;
use crate::geometry::NormOrder;

/// `C`, `d` and `p` in `λ = C · L · d^(1/p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundSpec {
    pub constant: f64,
    pub dim: usize,
    pub norm_order: NormOrder,
}

impl BoundSpec {
    pub fn new(constant: f64, dim: usize, norm_order: NormOrder) -> Result<Self> {
        if constant != 1.0 && constant != 2.0 {
            return Err(Error::invalid("bound constant", alloc::format!("must be 1 or 2, got {constant}")));
        }
        if dim == 0 {
            return Err(Error::invalid("bound dimension", "must be positive"));
        }
        Ok(BoundSpec { constant, dim, norm_order })
    }

    pub fn for_explainer(kind: ExplainerKind, dim: usize, norm_order: NormOrder) -> Result<Self> {
        BoundSpec::new(kind.bound_constant(), dim, norm_order)
    }

    /// Explanation scale `λ` guaranteed by a Lipschitz constant `L`.
    pub fn lambda_for(&self, lipschitz: f64) -> f64 {
        self.constant * lipschitz * self.norm_order.dim_factor(self.dim)
    }
}

/// Lower bound on astuteness: at each `λ`, the largest profile value among
/// grid points `L` with `C · L · d^(1/p) ≤ λ`, or 0 when there are none.
/// A step function over the profile grid, never an interpolation.
pub fn predict_bound(profile: &RobustnessCurve, spec: &BoundSpec, lambda_grid: &[f64]) -> Result<RobustnessCurve> {
    check_grid(lambda_grid)?;
    if profile.kind != CurveKind::Lipschitzness {
        return Err(Error::invalid("profile", alloc::format!("expected a lipschitzness curve, got {}", profile.kind)));
    }
    let activation: Vec<(f64, f64)> =
        profile.grid.iter().zip(&profile.values).map(|(&l, &v)| (spec.lambda_for(l), v)).collect();
    let values = lambda_grid
        .iter()
        .map(|&lambda| {
            // tolerate rounding in C · L · d^(1/p) landing a hair above a grid λ
            let reach = lambda * (1.0 + 1e-12);
            activation.iter().filter(|(a, _)| *a <= reach).map(|&(_, v)| v).fold(0.0, f64::max)
        })
        .collect();
    RobustnessCurve::new(
        CurveKind::PredictedBound,
        lambda_grid.to_vec(),
        values,
        profile.radius,
        profile.norm_order,
        profile.n_pairs,
        profile.subject_id.clone(),
    )
}
