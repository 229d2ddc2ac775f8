//! In-memory tabular datasets with binary labels.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `n` samples of dimension `dim` stored row-major, each with a 0/1 label.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<u8>,
    dim: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, labels: Vec<u8>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dataset", "dimension must be at least 1"));
        }
        if labels.is_empty() {
            return Err(Error::invalid("dataset", "no samples"));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::invalid(
                "dataset",
                alloc::format!(
                    "{} feature values do not form {} rows of dimension {dim}",
                    features.len(),
                    labels.len()
                ),
            ));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { sample: pos / dim, feature: pos % dim });
        }
        if let Some(pos) = labels.iter().position(|&y| y > 1) {
            return Err(Error::invalid("dataset", alloc::format!("label {} at row {pos} is not 0 or 1", labels[pos])));
        }
        Ok(Dataset { features, labels, dim })
    }

    /// Builds a dataset from explicit rows.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<u8>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, actual: bad.len() });
        }
        Dataset::new(rows.concat(), labels, dim)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Row-major feature matrix.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn samples(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.dim)
    }

    /// Fraction of samples labelled 1.
    pub fn positive_rate(&self) -> f64 {
        self.labels.iter().filter(|&&y| y == 1).count() as f64 / self.len() as f64
    }

    /// Splits into the first `n_first` samples and the rest.
    pub fn split_at(&self, n_first: usize) -> Result<(Dataset, Dataset)> {
        if n_first == 0 || n_first >= self.len() {
            return Err(Error::invalid("split", alloc::format!("cannot split {} samples at {n_first}", self.len())));
        }
        let cut = n_first * self.dim;
        Ok((
            Dataset { features: self.features[..cut].to_vec(), labels: self.labels[..n_first].to_vec(), dim: self.dim },
            Dataset { features: self.features[cut..].to_vec(), labels: self.labels[n_first..].to_vec(), dim: self.dim },
        ))
    }

    /// Keeps the given rows, in order.
    pub fn select(&self, rows: &[usize]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(rows.len() * self.dim);
        let mut labels = Vec::with_capacity(rows.len());
        for &i in rows {
            if i >= self.len() {
                return Err(Error::invalid("row", alloc::format!("index {i} out of range for {} samples", self.len())));
            }
            features.extend_from_slice(self.sample(i));
            labels.push(self.labels[i]);
        }
        Dataset::new(features, labels, self.dim)
    }
}

/// Per-feature z-score transform fitted on one dataset and applied to others.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureScaler {
    /// Column means and sample standard deviations (n - 1 denominator).
    /// Constant columns get a unit scale so they map to zero.
    pub fn fit(data: &Dataset) -> Self {
        let n = data.len() as f64;
        let mut mean = alloc::vec![0.0; data.dim()];
        for row in data.samples() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; data.dim()];
        for row in data.samples() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let denom = if data.len() > 1 { n - 1.0 } else { 1.0 };
        let std = var
            .into_iter()
            .map(|s| {
                let sd = libm::sqrt(s / denom);
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        FeatureScaler { mean, std }
    }

    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        if data.dim() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), actual: data.dim() });
        }
        let features = data
            .features
            .chunks_exact(data.dim)
            .flat_map(|row| row.iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| (v - m) / s))
            .collect();
        Dataset::new(features, data.labels.clone(), data.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(Dataset::new(vec![1.0, 2.0, 3.0], vec![0, 1], 2).is_err());
        assert!(Dataset::new(vec![1.0, f64::NAN], vec![0], 2).is_err());
        assert!(Dataset::new(vec![1.0, 2.0], vec![2], 2).is_err());
        assert!(Dataset::new(vec![], vec![], 1).is_err());
    }

    #[test]
    fn split_and_select() {
        let d = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], vec![0, 1, 1]).unwrap();
        let (a, b) = d.split_at(1).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(b.sample(1), &[2.0]);
        assert_eq!(d.select(&[2, 0]).unwrap().labels(), &[1, 0]);
        assert!((d.positive_rate() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn scaler_standardizes_columns() {
        let d = Dataset::from_rows(&[vec![1.0, 5.0], vec![2.0, 5.0], vec![6.0, 5.0]], vec![0, 1, 0]).unwrap();
        let s = FeatureScaler::fit(&d);
        let t = s.transform(&d).unwrap();
        let col: Vec<f64> = t.samples().map(|r| r[0]).collect();
        let mean = col.iter().sum::<f64>() / 3.0;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 2.0;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
        assert!(t.samples().all(|r| r[1] == 0.0));
    }
}
