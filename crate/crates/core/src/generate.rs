//! Synthetic binary classification benchmarks.
//!
//! All three draw standard Gaussian features and label each sample 1 with
//! probability `sigmoid(v)`, where `v` is the generator's score:
//!
//! - orange skin: `v = x1² + x2² + x3² + x4² - 4`
//! - nonlinear additive: `v = -100 sin(2 x1) + 2|x2| + x3 + exp(-x4)`
//! - switch: `x1` comes from an equal mixture of `N(+3, 1)` and `N(-3, 1)`;
//!   the upper component scores `x2..x5` with the orange-skin rule, the lower
//!   one scores `x6..x9` with the nonlinear-additive rule.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::predict::sigmoid;
use crate::rng;

pub const DEFAULT_DIM: usize = 10;
/// Mean of the switch mixture components.
pub const SWITCH_CENTER: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GeneratorKind {
    OrangeSkin,
    NonlinearAdditive,
    Switch,
}

/// Which switch mixture component produced `x1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchBranch {
    Upper,
    Lower,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 3] =
        [GeneratorKind::OrangeSkin, GeneratorKind::NonlinearAdditive, GeneratorKind::Switch];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::OrangeSkin => "orange_skin",
            GeneratorKind::NonlinearAdditive => "nonlinear_additive",
            GeneratorKind::Switch => "switch",
        }
    }

    pub fn min_dim(self) -> usize {
        match self {
            GeneratorKind::OrangeSkin | GeneratorKind::NonlinearAdditive => 4,
            GeneratorKind::Switch => 10,
        }
    }

    /// Score `v` of `x`. For the switch data `branch` selects the rule; when
    /// absent it is read off the sign of `x1`.
    pub fn score(self, x: &[f64], branch: Option<SwitchBranch>) -> f64 {
        match self {
            GeneratorKind::OrangeSkin => orange_skin_score(&x[..4]),
            GeneratorKind::NonlinearAdditive => nonlinear_additive_score(&x[..4]),
            GeneratorKind::Switch => {
                let branch = branch.unwrap_or(if x[0] >= 0.0 { SwitchBranch::Upper } else { SwitchBranch::Lower });
                match branch {
                    SwitchBranch::Upper => orange_skin_score(&x[1..5]),
                    SwitchBranch::Lower => nonlinear_additive_score(&x[5..9]),
                }
            }
        }
    }

    /// `P(Y = 1 | x)`.
    pub fn label_probability(self, x: &[f64], branch: Option<SwitchBranch>) -> f64 {
        sigmoid(self.score(x, branch))
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for GeneratorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orange_skin" => Ok(GeneratorKind::OrangeSkin),
            "nonlinear_additive" => Ok(GeneratorKind::NonlinearAdditive),
            "switch" => Ok(GeneratorKind::Switch),
            other => Err(Error::invalid("generator", alloc::format!("unknown kind {other:?}"))),
        }
    }
}

fn orange_skin_score(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() - 4.0
}

fn nonlinear_additive_score(x: &[f64]) -> f64 {
    -100.0 * libm::sin(2.0 * x[0]) + 2.0 * libm::fabs(x[1]) + x[2] + libm::exp(-x[3])
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub dim: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, seed: u64) -> Self {
        GeneratorSpec { kind, n, dim: DEFAULT_DIM, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("sample count", "n must be positive"));
        }
        if self.dim < self.kind.min_dim() {
            return Err(Error::DimTooSmall { kind: self.kind.name(), min: self.kind.min_dim(), dim: self.dim });
        }
        Ok(())
    }
}

/// Draws `spec.n` samples. Sample `i` depends only on `(spec, i)`, so a
/// prefix of a larger draw equals a smaller draw with the same seed.
pub fn generate(spec: &GeneratorSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut features = Vec::with_capacity(spec.n * spec.dim);
    let mut labels = Vec::with_capacity(spec.n);
    let mut row = alloc::vec![0.0; spec.dim];
    for i in 0..spec.n {
        let mut rng = rng::stream(spec.seed, i as u64);
        let branch = (spec.kind == GeneratorKind::Switch).then(|| {
            if rng.random_bool(0.5) {
                SwitchBranch::Upper
            } else {
                SwitchBranch::Lower
            }
        });
        for v in row.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        match branch {
            Some(SwitchBranch::Upper) => row[0] += SWITCH_CENTER,
            Some(SwitchBranch::Lower) => row[0] -= SWITCH_CENTER,
            None => {}
        }
        let prob = spec.kind.label_probability(&row, branch);
        labels.push(u8::from(rng.random::<f64>() < prob));
        features.extend_from_slice(&row);
    }
    Dataset::new(features, labels, spec.dim)
}
