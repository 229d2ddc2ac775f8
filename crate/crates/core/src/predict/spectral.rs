//! Operator norms and the Lipschitz projection applied during training.

use alloc::vec::Vec;

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::geometry::NormOrder;

/// Relative change in the singular value estimate at which power iteration stops.
pub const POWER_TOLERANCE: f64 = 1e-7;
/// Iterations always run before the tolerance is consulted.
pub const POWER_MIN_ITERS: usize = 50;
pub const POWER_MAX_ITERS: usize = 500;

/// Largest singular value by power iteration on `WᵀW`, started from the
/// normalized all-ones vector. Runs at least [`POWER_MIN_ITERS`] iterations,
/// then stops once the estimate changes by less than [`POWER_TOLERANCE`].
pub fn spectral_norm(w: &Matrix) -> f64 {
    spectral_norm_with(w, POWER_TOLERANCE, POWER_MAX_ITERS)
}

pub fn spectral_norm_with(w: &Matrix, tolerance: f64, max_iters: usize) -> f64 {
    let (rows, cols) = (w.rows(), w.cols());
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let mut v = alloc::vec![1.0 / libm::sqrt(cols as f64); cols];
    let mut u = alloc::vec![0.0; rows];
    let mut sigma = 0.0;
    for iter in 0..max_iters.max(1) {
        w.mul_vec(&v, &mut u);
        let next = l2(&u);
        if next == 0.0 {
            if iter > 0 {
                return sigma;
            }
            // The start vector is in the null space; restart on the heaviest column.
            match heaviest_column(w) {
                Some(c) => {
                    v.iter_mut().for_each(|x| *x = 0.0);
                    v[c] = 1.0;
                    continue;
                }
                None => return 0.0,
            }
        }
        let converged = iter + 1 >= POWER_MIN_ITERS && libm::fabs(next - sigma) <= tolerance * next;
        sigma = next;
        if converged {
            break;
        }
        w.mul_transpose_vec(&u, &mut v);
        let n = l2(&v);
        if n == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= n);
    }
    sigma
}

fn heaviest_column(w: &Matrix) -> Option<usize> {
    let mut norms: Vec<f64> = alloc::vec![0.0; w.cols()];
    for r in 0..w.rows() {
        for (n, x) in norms.iter_mut().zip(w.row(r)) {
            *n += x * x;
        }
    }
    norms.iter().enumerate().filter(|(_, &n)| n > 0.0).max_by(|a, b| a.1.total_cmp(b.1)).map(|(c, _)| c)
}

fn l2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum::<f64>())
}

/// Operator norm induced by the p-norm on both sides. Exact for p = 1 and
/// p = ∞, power iteration for p = 2, and the Riesz–Thorin upper bound
/// `‖W‖₁^(1/p) ‖W‖_∞^(1-1/p)` for other p.
pub fn operator_norm(w: &Matrix, ord: NormOrder) -> f64 {
    let p = ord.p();
    if p == 2.0 {
        spectral_norm(w)
    } else if p == 1.0 {
        max_column_sum(w)
    } else if p.is_infinite() {
        max_row_sum(w)
    } else {
        libm::pow(max_column_sum(w), 1.0 / p) * libm::pow(max_row_sum(w), 1.0 - 1.0 / p)
    }
}

fn max_column_sum(w: &Matrix) -> f64 {
    let mut sums = alloc::vec![0.0; w.cols()];
    for r in 0..w.rows() {
        for (s, x) in sums.iter_mut().zip(w.row(r)) {
            *s += libm::fabs(*x);
        }
    }
    sums.into_iter().fold(0.0, f64::max)
}

fn max_row_sum(w: &Matrix) -> f64 {
    (0..w.rows()).map(|r| w.row(r).iter().map(|x| libm::fabs(*x)).sum::<f64>()).fold(0.0, f64::max)
}

/// Rescales `w` to `w · min(1, cap / ‖w‖)`; feasible matrices come back unchanged.
pub fn project_lipschitz(w: &Matrix, cap: f64, ord: NormOrder) -> Result<Matrix> {
    let mut out = w.clone();
    project_in_place(&mut out, cap, ord)?;
    Ok(out)
}

pub(crate) fn project_in_place(w: &mut Matrix, cap: f64, ord: NormOrder) -> Result<()> {
    if !(cap > 0.0) || !cap.is_finite() {
        return Err(Error::invalid("lipschitz cap", alloc::format!("must be positive and finite, got {cap}")));
    }
    let norm = operator_norm(w, ord);
    if norm > cap {
        w.scale(cap / norm);
    }
    Ok(())
}
