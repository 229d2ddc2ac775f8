use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value at sample {sample}, feature {feature}")]
    NonFinite { sample: usize, feature: usize },

    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("radius {radius} too small for this dataset: no pair lies within it")]
    RadiusTooSmall { radius: f64 },

    #[error("{kind} requires dim ≥ {min}, got {dim}")]
    DimTooSmall { kind: &'static str, min: usize, dim: usize },

    #[error("exact enumeration supports at most {cutoff} features, got {dim}; use the sampled estimator")]
    TooManyFeatures { dim: usize, cutoff: usize },

    #[error("training diverged at epoch {epoch} (loss or weights overflowed); lower the learning rate")]
    Diverged { epoch: usize },

    #[error("no attribution for sample {0}")]
    MissingAttribution(usize),

    #[error("infeasible problem: alpha {alpha} exceeds the total mass {total}")]
    Infeasible { alpha: f64, total: f64 },

    #[error("no grid point satisfies the budget constraint")]
    NoFeasiblePoint,

    #[error("no known Lipschitz bound for {0} models")]
    NoKnownBound(&'static str),

    #[error("invalid {name}: {reason}")]
    Invalid { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid { name, reason: reason.into() }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Diverged { .. })
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
