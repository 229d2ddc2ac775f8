//! p-norm distances and binary feature masks.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Order `p >= 1` of the norm used for every distance. `f64::INFINITY` is
/// the max norm.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "NormRepr", into = "NormRepr"))]
pub struct NormOrder(f64);

impl NormOrder {
    pub const L1: NormOrder = NormOrder(1.0);
    pub const L2: NormOrder = NormOrder(2.0);
    pub const MAX: NormOrder = NormOrder(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(NormOrder(p))
        } else {
            Err(Error::invalid("norm order", alloc::format!("p must be >= 1, got {p}")))
        }
    }

    pub fn p(self) -> f64 {
        self.0
    }

    /// Hölder conjugate q with 1/p + 1/q = 1.
    pub fn dual(self) -> NormOrder {
        if self.0 == 1.0 {
            NormOrder::MAX
        } else if self.0.is_infinite() {
            NormOrder::L1
        } else {
            NormOrder(self.0 / (self.0 - 1.0))
        }
    }

    /// `d^(1/p)`, the factor relating the p-norm of a d-vector to its max entry.
    pub fn dim_factor(self, dim: usize) -> f64 {
        if self.0.is_infinite() {
            1.0
        } else {
            libm::pow(dim as f64, 1.0 / self.0)
        }
    }

    /// Norm of `v`.
    pub fn norm(self, v: &[f64]) -> f64 {
        norm_iter(self.0, v.iter().copied())
    }
}

impl Default for NormOrder {
    fn default() -> Self {
        NormOrder::L2
    }
}

impl TryFrom<f64> for NormOrder {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        NormOrder::new(p)
    }
}

impl From<NormOrder> for f64 {
    fn from(ord: NormOrder) -> f64 {
        ord.0
    }
}

/// Parses `"1"`, `"2.5"`, or `"inf"` (also `"infinity"`, `"max"`).
impl core::str::FromStr for NormOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" => Ok(NormOrder::MAX),
            t => t
                .parse::<f64>()
                .map_err(|_| Error::invalid("norm order", alloc::format!("cannot parse {s:?}")))
                .and_then(NormOrder::new),
        }
    }
}

impl fmt::Display for NormOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Serialized form: a number, or the string `"inf"` for the max norm since
/// JSON has no infinity.
#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
enum NormRepr {
    Number(f64),
    Name(alloc::string::String),
}

#[cfg(feature = "serde")]
impl From<NormOrder> for NormRepr {
    fn from(ord: NormOrder) -> Self {
        if ord.0.is_infinite() {
            NormRepr::Name("inf".into())
        } else {
            NormRepr::Number(ord.0)
        }
    }
}

#[cfg(feature = "serde")]
impl TryFrom<NormRepr> for NormOrder {
    type Error = Error;
    fn try_from(r: NormRepr) -> Result<Self> {
        match r {
            NormRepr::Number(p) => NormOrder::new(p),
            NormRepr::Name(s) => s.parse(),
        }
    }
}

fn norm_iter(p: f64, values: impl Iterator<Item = f64>) -> f64 {
    if p == 2.0 {
        // scaled accumulation is unnecessary at the magnitudes we handle
        libm::sqrt(values.map(|v| v * v).sum::<f64>())
    } else if p == 1.0 {
        values.map(libm::fabs).sum()
    } else if p.is_infinite() {
        values.map(libm::fabs).fold(0.0, f64::max)
    } else {
        libm::pow(values.map(|v| libm::pow(libm::fabs(v), p)).sum::<f64>(), 1.0 / p)
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: a, actual: b })
    }
}

/// `||a - b||_p`.
pub fn distance(a: &[f64], b: &[f64], ord: NormOrder) -> Result<f64> {
    check_dims(a.len(), b.len())?;
    Ok(distance_unchecked(a, b, ord))
}

pub(crate) fn distance_unchecked(a: &[f64], b: &[f64], ord: NormOrder) -> f64 {
    norm_iter(ord.0, a.iter().zip(b).map(|(x, y)| x - y))
}

/// A subset of features; bit `i` set keeps feature `i`, cleared removes it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    bits: Vec<bool>,
}

impl Mask {
    pub fn ones(dim: usize) -> Self {
        Mask { bits: alloc::vec![true; dim] }
    }

    pub fn zeros(dim: usize) -> Self {
        Mask { bits: alloc::vec![false; dim] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Mask { bits }
    }

    /// Mask whose bit `i` is bit `i` of `code`. Requires `dim <= 64`.
    pub fn from_code(code: u64, dim: usize) -> Self {
        debug_assert!(dim <= 64);
        Mask { bits: (0..dim).map(|i| code >> i & 1 == 1).collect() }
    }

    pub fn dim(&self) -> usize {
        self.bits.len()
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, keep: bool) {
        self.bits[i] = keep;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// `x ⊙ z`: removed features are replaced by the zero baseline.
pub fn apply_mask(x: &[f64], mask: &Mask) -> Result<Vec<f64>> {
    check_dims(x.len(), mask.dim())?;
    Ok(x.iter().zip(&mask.bits).map(|(&v, &keep)| if keep { v } else { 0.0 }).collect())
}

/// Writes `x ⊙ code` into `out`, bit `i` of `code` selecting feature `i`.
#[inline]
pub(crate) fn mask_into(x: &[f64], code: u64, out: &mut [f64]) {
    for (i, (o, &v)) in out.iter_mut().zip(x).enumerate() {
        *o = if code >> i & 1 == 1 { v } else { 0.0 };
    }
}
