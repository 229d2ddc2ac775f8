use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::geometry::NormOrder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CurveKind {
    /// `1 − α` as a function of `L`.
    Lipschitzness,
    /// Empirical astuteness as a function of `λ`.
    Astuteness,
    /// Lower bound on astuteness implied by a Lipschitzness profile.
    PredictedBound,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::Lipschitzness => "lipschitzness",
            CurveKind::Astuteness => "astuteness",
            CurveKind::PredictedBound => "predicted_bound",
        }
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Probabilities on an ascending grid of `L` or `λ` values.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RobustnessCurve {
    pub kind: CurveKind,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub radius: f64,
    pub norm_order: NormOrder,
    pub n_pairs: usize,
    pub subject_id: String,
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must not be empty"));
    }
    if grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::invalid("grid", "values must be finite"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("grid", "values must be strictly ascending"));
    }
    Ok(())
}

impl RobustnessCurve {
    pub fn new(
        kind: CurveKind,
        grid: Vec<f64>,
        values: Vec<f64>,
        radius: f64,
        norm_order: NormOrder,
        n_pairs: usize,
        subject_id: impl Into<String>,
    ) -> Result<Self> {
        check_grid(&grid)?;
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), actual: values.len() });
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("curve", "probabilities must lie in [0, 1]"));
        }
        Ok(RobustnessCurve { kind, grid, values, radius, norm_order, n_pairs, subject_id: subject_id.into() })
    }

    pub fn with_subject(mut self, subject_id: impl Into<String>) -> Self {
        self.subject_id = subject_id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// Linear interpolation between grid points, constant beyond the ends.
    pub fn value_at(&self, t: f64) -> f64 {
        let g = &self.grid;
        if t <= g[0] {
            return self.values[0];
        }
        if t >= g[g.len() - 1] {
            return self.values[g.len() - 1];
        }
        let k = g.partition_point(|&x| x <= t);
        let (x0, x1) = (g[k - 1], g[k]);
        let (y0, y1) = (self.values[k - 1], self.values[k]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    /// Smallest grid value whose probability reaches `level`.
    pub fn first_reaching(&self, level: f64) -> Option<f64> {
        self.grid.iter().zip(&self.values).find(|(_, &v)| v >= level).map(|(&g, _)| g)
    }
}

/// `start, start + step, …` up to `stop` inclusive, rounded to 12 decimals.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::invalid("grid", alloc::format!("bad range {start}..{stop} step {step}")));
    }
    let n = libm::floor((stop - start) / step + 1e-9) as usize;
    Ok((0..=n).map(|i| libm::round((start + i as f64 * step) * 1e12) / 1e12).collect())
}

/// `L ∈ {0.1, 0.2, …, 1.0}`.
pub fn default_lipschitz_grid() -> Vec<f64> {
    linear_grid(0.1, 1.0, 0.1).expect("valid range")
}

/// `λ ∈ {0.1, 0.2, …, 1.1}`.
pub fn default_lambda_grid() -> Vec<f64> {
    linear_grid(0.1, 1.1, 0.1).expect("valid range")
}
