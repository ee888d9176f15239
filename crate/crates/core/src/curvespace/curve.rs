use super::space::{same_space, SpaceRef};
use crate::error::{Error, Result};

/// Comparison grid size used by [`curve_distance`] unless overridden.
pub const DEFAULT_GRID: usize = 128;

/// How a curve is allowed to move between samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Continuity {
    /// Physically realizable; `speed_bound` (normalized units per unit
    /// parameter time) caps the discrete speed when present.
    Continuous { speed_bound: Option<f64> },
    /// Score-derived motion that may jump.
    PiecewiseWithJumps,
}

impl Continuity {
    pub fn speed_bound(&self) -> Option<f64> {
        match self {
            Continuity::Continuous { speed_bound } => *speed_bound,
            Continuity::PiecewiseWithJumps => None,
        }
    }
}

/// A curve `[0,1] → X` sampled on the uniform grid `tᵢ = i/(N−1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    space: SpaceRef,
    samples: Vec<Vec<f64>>,
    continuity: Continuity,
}

impl Curve {
    pub fn new(space: SpaceRef, samples: Vec<Vec<f64>>, continuity: Continuity) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidCurve(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        let dim = space.dim();
        for (i, p) in samples.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidCurve(format!(
                    "sample {i} has dimension {}, space `{}` has {dim}",
                    p.len(),
                    space.name()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidCurve(format!("sample {i} is not finite")));
            }
        }
        if let Some(b) = continuity.speed_bound() {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::InvalidCurve(format!("speed bound must be positive and finite, got {b}")));
            }
        }
        Ok(Self {
            space,
            samples,
            continuity,
        })
    }

    /// Samples `f` on an `n`-point uniform grid.
    pub fn from_fn(space: SpaceRef, n: usize, continuity: Continuity, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let n = n.max(2);
        let samples = (0..n).map(|i| f(grid_time(i, n))).collect();
        Self::new(space, samples, continuity)
    }

    /// Straight segment from `a` to `b`.
    pub fn line(space: SpaceRef, a: &[f64], b: &[f64], n: usize, continuity: Continuity) -> Result<Self> {
        let n = n.max(2);
        let mut samples: Vec<Vec<f64>> = (0..n)
            .map(|i| lerp(a, b, grid_time(i, n)))
            .collect();
        samples[n - 1] = b.to_vec();
        Self::new(space, samples, continuity)
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn continuity(&self) -> Continuity {
        self.continuity
    }

    pub fn start(&self) -> &[f64] {
        &self.samples[0]
    }

    pub fn end(&self) -> &[f64] {
        &self.samples[self.samples.len() - 1]
    }

    pub fn with_continuity(mut self, continuity: Continuity) -> Self {
        self.continuity = continuity;
        self
    }

    /// Replaces samples without re-validating dimensions; callers keep them finite.
    pub(crate) fn with_samples(&self, samples: Vec<Vec<f64>>) -> Self {
        debug_assert!(samples.len() >= 2);
        Self {
            space: self.space.clone(),
            samples,
            continuity: self.continuity,
        }
    }

    /// Unchecked constructor for samples produced by trusted transformations.
    pub(crate) fn from_parts(space: SpaceRef, samples: Vec<Vec<f64>>, continuity: Continuity) -> Self {
        debug_assert!(samples.len() >= 2);
        Self {
            space,
            samples,
            continuity,
        }
    }

    /// Piecewise-linear evaluation; `t` is clamped to `[0,1]` and the two
    /// endpoints are returned exactly.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let n = self.samples.len();
        if t.is_nan() || t <= 0.0 {
            return self.samples[0].clone();
        }
        if t >= 1.0 {
            return self.samples[n - 1].clone();
        }
        let pos = t * (n - 1) as f64;
        let k = (pos.floor() as usize).min(n - 2);
        let frac = pos - k as f64;
        if frac == 0.0 {
            return self.samples[k].clone();
        }
        lerp(&self.samples[k], &self.samples[k + 1], frac)
    }

    /// Discrete speed `max |pᵢ₊₁ − pᵢ| / Δt` in normalized units.
    pub fn max_speed(&self) -> f64 {
        let scale = (self.samples.len() - 1) as f64;
        self.samples
            .windows(2)
            .map(|w| self.space.normalized_distance(&w[0], &w[1]) * scale)
            .fold(0.0, f64::max)
    }

    /// Polyline length in normalized units.
    pub fn arc_length(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| self.space.normalized_distance(&w[0], &w[1]))
            .sum()
    }
}

/// `tᵢ = i/(n−1)`.
pub fn grid_time(i: usize, n: usize) -> f64 {
    if i + 1 == n {
        1.0
    } else {
        i as f64 / (n - 1) as f64
    }
}

/// `a + (b − a)·s`, exact at `s = 0` and wherever `a = b`.
pub(crate) fn lerp(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + (y - x) * s).collect()
}

/// Piecewise-linear resampling onto the uniform `n`-grid.
///
/// Endpoints are copied bitwise; `n` equal to the current sample count
/// returns the curve unchanged.
pub fn resample(c: &Curve, n: usize) -> Curve {
    let n = n.max(2);
    if n == c.len() {
        return c.clone();
    }
    let mut samples: Vec<Vec<f64>> = (0..n).map(|i| c.eval(grid_time(i, n))).collect();
    samples[0] = c.start().to_vec();
    samples[n - 1] = c.end().to_vec();
    c.with_samples(samples)
}

/// Sup-norm distance between two curves of one space on an `m`-point grid,
/// measured in normalized coordinates.
pub fn curve_distance_on(a: &Curve, b: &Curve, m: usize) -> Result<f64> {
    if !same_space(a.space(), b.space()) {
        return Err(crate::error::Error::space_mismatch(
            a.space().name(),
            b.space().name(),
            "curve distance",
        ));
    }
    let m = m.max(2);
    let space = a.space();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let t = grid_time(i, m);
        let d = space.normalized_distance(&a.eval(t), &b.eval(t));
        worst = worst.max(d);
    }
    Ok(worst)
}

/// [`curve_distance_on`] with the default grid of [`DEFAULT_GRID`] points.
pub fn curve_distance(a: &Curve, b: &Curve) -> Result<f64> {
    curve_distance_on(a, b, DEFAULT_GRID)
}

/// CSV rendering: a header of coordinate names, then one row per sample.
pub fn curve_to_csv(c: &Curve) -> String {
    let mut out = c
        .space()
        .dims()
        .iter()
        .map(|d| d.name.as_str())
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for p in c.samples() {
        let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
