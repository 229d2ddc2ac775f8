//! Enumeration and sampling of unordered sample pairs.
//!
//! Both probabilistic Lipschitzness and astuteness condition on pairs whose
//! inputs lie within a radius of each other. Pairs are drawn from the dataset
//! first and filtered by distance afterwards.

use alloc::vec::Vec;

use rand::seq::index;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{distance_unchecked, NormOrder};
use crate::rng;

pub const DEFAULT_MAX_PAIRS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PairMode {
    /// Every unordered pair, regardless of `max_pairs`.
    Exhaustive,
    /// Every pair when there are at most `max_pairs` of them, otherwise a
    /// uniform sample of `max_pairs` distinct pairs.
    #[default]
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairSamplePlan {
    pub radius: f64,
    pub max_pairs: usize,
    pub seed: u64,
    pub mode: PairMode,
}

impl PairSamplePlan {
    pub fn new(radius: f64, seed: u64) -> Self {
        PairSamplePlan { radius, max_pairs: DEFAULT_MAX_PAIRS, seed, mode: PairMode::Sampled }
    }

    pub fn exhaustive(radius: f64) -> Self {
        PairSamplePlan { radius, max_pairs: DEFAULT_MAX_PAIRS, seed: 0, mode: PairMode::Exhaustive }
    }

    pub fn with_max_pairs(mut self, max_pairs: usize) -> Self {
        self.max_pairs = max_pairs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius >= 0.0) {
            return Err(Error::invalid("radius", alloc::format!("must be >= 0, got {}", self.radius)));
        }
        if self.max_pairs == 0 {
            return Err(Error::invalid("max_pairs", "must be >= 1"));
        }
        Ok(())
    }
}

/// An unordered pair `i < j` and the distance between the two samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

/// Pairs within `radius`, sorted by `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSet {
    pub pairs: Vec<Pair>,
    pub radius: f64,
    pub ord: NormOrder,
    /// Pairs examined before the radius filter.
    pub candidates: usize,
}

impl PairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn total_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Candidate `(i, j)` index pairs in ascending order.
fn candidates(n: usize, mode: PairMode, max_pairs: usize, seed: u64) -> Vec<(usize, usize)> {
    let total = total_pairs(n);
    if mode == PairMode::Exhaustive || total <= max_pairs {
        let mut out = Vec::with_capacity(total);
        for i in 0..n {
            for j in i + 1..n {
                out.push((i, j));
            }
        }
        return out;
    }
    let mut rng = rng::stream(seed, rng::tag::PAIRS);
    let mut picked = index::sample(&mut rng, total, max_pairs).into_vec();
    picked.sort_unstable();
    // Row i holds the n - 1 - i pairs (i, i+1), ..., (i, n-1).
    let mut out = Vec::with_capacity(picked.len());
    let (mut row, mut row_start) = (0usize, 0usize);
    for k in picked {
        while k >= row_start + (n - 1 - row) {
            row_start += n - 1 - row;
            row += 1;
        }
        out.push((row, row + 1 + (k - row_start)));
    }
    out
}

/// Pairs of `data` within `plan.radius` under `ord`.
pub fn sample_pairs(data: &Dataset, plan: &PairSamplePlan, ord: NormOrder) -> Result<PairSet> {
    plan.validate()?;
    let cand = candidates(data.len(), plan.mode, plan.max_pairs, plan.seed);
    let candidates = cand.len();
    let pairs: Vec<Pair> = cand
        .into_iter()
        .filter_map(|(i, j)| {
            let distance = distance_unchecked(data.sample(i), data.sample(j), ord);
            (distance <= plan.radius).then_some(Pair { i, j, distance })
        })
        .collect();
    if pairs.is_empty() {
        return Err(Error::RadiusTooSmall { radius: plan.radius });
    }
    Ok(PairSet { pairs, radius: plan.radius, ord, candidates })
}

/// Median distance over all pairs, or over a uniform sample of `max_pairs`
/// of them when there are more.
pub fn median_pairwise_distance(data: &Dataset, ord: NormOrder, max_pairs: usize, seed: u64) -> Result<f64> {
    if data.len() < 2 {
        return Err(Error::TooFewSamples(data.len()));
    }
    if max_pairs == 0 {
        return Err(Error::invalid("max_pairs", "must be >= 1"));
    }
    let mut dists: Vec<f64> = candidates(data.len(), PairMode::Sampled, max_pairs, seed)
        .into_iter()
        .map(|(i, j)| distance_unchecked(data.sample(i), data.sample(j), ord))
        .collect();
    dists.sort_unstable_by(f64::total_cmp);
    let m = dists.len();
    Ok(if m % 2 == 1 { dists[m / 2] } else { 0.5 * (dists[m / 2 - 1] + dists[m / 2]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line(points: &[f64]) -> Dataset {
        let rows: Vec<Vec<f64>> = points.iter().map(|&p| vec![p]).collect();
        Dataset::from_rows(&rows, vec![0; points.len()]).unwrap()
    }

    #[test]
    fn median_examples() {
        let ord = NormOrder::L2;
        assert_eq!(median_pairwise_distance(&line(&[0.0, 1.0, 3.0]), ord, 100, 0).unwrap(), 2.0);
        assert_eq!(median_pairwise_distance(&line(&[4.0, 4.0]), ord, 100, 0).unwrap(), 0.0);
        assert_eq!(median_pairwise_distance(&line(&[0.0, 2.0]), ord, 100, 0).unwrap(), 2.0);
        // distances {1, 3, 6, 2, 5, 3}: middle two are 3 and 3
        assert_eq!(median_pairwise_distance(&line(&[0.0, 1.0, 3.0, 6.0]), ord, 100, 0).unwrap(), 3.0);
        assert_eq!(median_pairwise_distance(&line(&[0.0]), ord, 100, 0), Err(Error::TooFewSamples(1)));
    }

    #[test]
    fn filters_by_radius() {
        let set = sample_pairs(&line(&[0.0, 1.0, 10.0]), &PairSamplePlan::new(2.0, 0), NormOrder::L2).unwrap();
        assert_eq!(set.pairs, vec![Pair { i: 0, j: 1, distance: 1.0 }]);
        assert_eq!(set.candidates, 3);
    }

    #[test]
    fn zero_radius_on_distinct_points_fails() {
        let err = sample_pairs(&line(&[0.0, 1.0, 10.0]), &PairSamplePlan::new(0.0, 0), NormOrder::L2);
        assert_eq!(err, Err(Error::RadiusTooSmall { radius: 0.0 }));
    }

    #[test]
    fn huge_radius_keeps_everything() {
        let data = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let set = sample_pairs(&data, &PairSamplePlan::exhaustive(f64::MAX), NormOrder::L2).unwrap();
        assert_eq!(set.len(), 10);
    }

    #[test]
    fn sampled_pairs_are_distinct_sorted_and_reproducible() {
        let points: Vec<f64> = (0..60).map(|i| i as f64).collect();
        let data = line(&points);
        let plan = PairSamplePlan::new(f64::MAX, 9).with_max_pairs(500);
        let a = sample_pairs(&data, &plan, NormOrder::L2).unwrap();
        let b = sample_pairs(&data, &plan, NormOrder::L2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 500);
        assert!(a.pairs.windows(2).all(|w| (w[0].i, w[0].j) < (w[1].i, w[1].j)));
        assert!(a.pairs.iter().all(|p| p.i < p.j && p.j < 60 && p.distance == (p.j - p.i) as f64));
        let c = sample_pairs(&data, &PairSamplePlan { seed: 10, ..plan }, NormOrder::L2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn decoding_covers_last_row() {
        // sampling every pair through the sampled path must reproduce enumeration
        let n = 7;
        let all = candidates(n, PairMode::Exhaustive, 1, 0);
        let sampled = candidates(n, PairMode::Sampled, total_pairs(n) - 1, 3);
        assert_eq!(sampled.len(), all.len() - 1);
        assert!(sampled.iter().all(|p| all.contains(p)));
    }
}
