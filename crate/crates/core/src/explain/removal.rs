use super::{check_input, Attribution, AttributionMeta, ExplainerKind};
use crate::error::Result;
use crate::predict::Predictor;

/// `φ_i = f(x) − f(x ⊙ z_{−i})`, using `d + 1` model evaluations.
pub fn remove_individual<F: Predictor + ?Sized>(f: &F, x: &[f64]) -> Result<Attribution> {
    check_input(f, x)?;
    let d = x.len();
    let mut rows = alloc::vec![0.0; (d + 1) * d];
    for (r, row) in rows.chunks_exact_mut(d).enumerate() {
        row.copy_from_slice(x);
        if r < d {
            row[r] = 0.0;
        }
    }
    let mut out = alloc::vec![0.0; d + 1];
    f.eval_batch(&rows, &mut out);
    let full = out[d];
    Ok(Attribution {
        scores: out[..d].iter().map(|v| full - v).collect(),
        explainer: ExplainerKind::RemoveIndividual,
        sample_index: 0,
        meta: AttributionMeta { evaluations: d + 1, exact: true, ..Default::default() },
    })
}
