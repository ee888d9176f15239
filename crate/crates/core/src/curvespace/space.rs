use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};

/// One coordinate of a configuration space, with the box used to normalize it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dimension {
    pub name: String,
    pub unit: String,
    pub min: f64,
    pub max: f64,
}

impl Dimension {
    pub fn new(name: impl Into<String>, unit: impl Into<String>, min: f64, max: f64) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            min,
            max,
        }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// A boxed configuration space `X ⊂ ℝⁿ`.
///
/// The box only fixes the scale used for normalized residuals; curves may
/// leave it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSpace {
    name: String,
    dims: Vec<Dimension>,
}

pub type SpaceRef = Arc<ConfigSpace>;

impl ConfigSpace {
    pub fn new(name: impl Into<String>, dims: Vec<Dimension>) -> Result<SpaceRef> {
        let name = name.into();
        if dims.is_empty() {
            return Err(Error::InvalidSpace(format!("space `{name}` has no dimensions")));
        }
        let mut seen = BTreeSet::new();
        for d in &dims {
            if !seen.insert(d.name.as_str()) {
                return Err(Error::InvalidSpace(format!(
                    "space `{name}` repeats coordinate `{}`",
                    d.name
                )));
            }
            if !(d.min.is_finite() && d.max.is_finite() && d.min < d.max) {
                return Err(Error::InvalidSpace(format!(
                    "coordinate `{}` of `{name}` needs finite min < max, got [{}, {}]",
                    d.name, d.min, d.max
                )));
            }
        }
        Ok(Arc::new(Self { name, dims }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn coordinate(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d.name == name)
    }

    /// Maps a point into unit-box coordinates.
    pub fn normalize(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(&self.dims)
            .map(|(x, d)| (x - d.min) / d.width())
            .collect()
    }

    /// Euclidean distance between two points after normalization.
    pub fn normalized_distance(&self, p: &[f64], q: &[f64]) -> f64 {
        p.iter()
            .zip(q)
            .zip(&self.dims)
            .map(|((a, b), d)| {
                let u = (a - b) / d.width();
                u * u
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Space identity: pointer equality first, then structural equality.
pub fn same_space(a: &SpaceRef, b: &SpaceRef) -> bool {
    Arc::ptr_eq(a, b) || a == b
}
