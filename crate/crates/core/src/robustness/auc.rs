use alloc::vec::Vec;

use super::curve::RobustnessCurve;
use crate::error::{Error, Result};

/// Normalized area under `curve` on `[lo, hi]`: the trapezoidal integral over
/// the curve's grid points inside the interval, with the curve held constant
/// beyond its ends, divided by `hi − lo`.
pub fn auc(curve: &RobustnessCurve, lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("auc interval", alloc::format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let mut knots: Vec<f64> = Vec::with_capacity(curve.len() + 2);
    knots.push(lo);
    knots.extend(curve.grid.iter().copied().filter(|&g| g > lo && g < hi));
    knots.push(hi);
    let area: f64 = knots.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (curve.value_at(w[0]) + curve.value_at(w[1]))).sum();
    Ok(area / (hi - lo))
}

/// `auc(emp) − auc(pred)` on a shared interval.
pub fn auc_gap(emp: &RobustnessCurve, pred: &RobustnessCurve, lo: f64, hi: f64) -> Result<f64> {
    Ok(auc(emp, lo, hi)? - auc(pred, lo, hi)?)
}
