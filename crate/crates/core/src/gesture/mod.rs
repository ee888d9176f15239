//! Gestures `g: Δ → X⃗`, their morphisms, homotopies, hypergestures,
//! addressed families and the symbolic-to-physical performance step.

mod addressed;
mod homotopy;
mod morphism;
mod performance;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::curvespace::{
    apply_spacemap_to_curve, curve_distance_on, same_space, Continuity, Curve, SpaceMap, SpaceRef, DEFAULT_GRID,
};
use crate::error::{Error, Result};
use crate::skeleton::Digraph;

pub use addressed::{
    check_addressed_morphism, curry_addressed, uncurry, AddressGrid, AddressedGesture, AddressedGestureMorphism,
    AddressedReport, AddressedSamples,
};
pub use homotopy::{evaluate_hypergesture, linear_homotopy, HomotopyFamily, Hypergesture, Interpolant};
pub use morphism::{check_morphism, check_morphism_on, GestureMorphism, MorphismReport};
pub use performance::performance_smooth;

/// Relative slack when comparing a measured speed with its bound.
const SPEED_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// Score-level motion; jumps allowed.
    Symbolic,
    /// Realizable motion with bounded speed.
    Physical,
}

/// Which end of an arrow curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Tail,
    Head,
}

/// One violated gesture invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EndpointMismatch {
        arrow: String,
        end: End,
        vertex: String,
        expected: Vec<f64>,
        found: Vec<f64>,
    },
    CurveSpaceMismatch {
        arrow: String,
        expected: String,
        found: String,
    },
    NotContinuous {
        arrow: String,
    },
    MissingSpeedBound {
        arrow: String,
    },
    SpeedBoundExceeded {
        arrow: String,
        speed: f64,
        bound: f64,
    },
}

/// Result of [`Gesture::validate`]; empty iff the gesture is valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A skeleton mapped into the curves of a configuration space.
#[derive(Debug, Clone, PartialEq)]
pub struct Gesture {
    skeleton: Digraph,
    space: SpaceRef,
    vertex_points: BTreeMap<String, Vec<f64>>,
    arrow_curves: BTreeMap<String, Curve>,
    flavor: Flavor,
}

impl Gesture {
    /// Checks that every vertex and arrow is covered exactly once and that
    /// points are finite and of the right dimension. Endpoint consistency and
    /// speed bounds are left to [`Gesture::validate`].
    pub fn new(
        skeleton: Digraph,
        space: SpaceRef,
        vertex_points: BTreeMap<String, Vec<f64>>,
        arrow_curves: BTreeMap<String, Curve>,
        flavor: Flavor,
    ) -> Result<Self> {
        if vertex_points.len() != skeleton.vertex_count() || !skeleton.vertices().all(|v| vertex_points.contains_key(v)) {
            return Err(Error::InvalidGesture(
                "vertex points must cover exactly the skeleton vertices".into(),
            ));
        }
        if arrow_curves.len() != skeleton.arrow_count() || !skeleton.arrows().all(|(a, _)| arrow_curves.contains_key(a)) {
            return Err(Error::InvalidGesture(
                "arrow curves must cover exactly the skeleton arrows".into(),
            ));
        }
        for (v, p) in &vertex_points {
            if p.len() != space.dim() || p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidGesture(format!(
                    "vertex `{v}` needs {} finite coordinates",
                    space.dim()
                )));
            }
        }
        Ok(Self {
            skeleton,
            space,
            vertex_points,
            arrow_curves,
            flavor,
        })
    }

    /// Builds a gesture whose vertex points are read off the curve endpoints.
    ///
    /// Fails when two arrows disagree on a shared vertex or a vertex has no
    /// incident arrow.
    pub fn from_curves(
        skeleton: Digraph,
        space: SpaceRef,
        arrow_curves: BTreeMap<String, Curve>,
        flavor: Flavor,
    ) -> Result<Self> {
        let mut points: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (a, inc) in skeleton.arrows() {
            let c = arrow_curves.get(a).ok_or_else(|| Error::UnknownArrow(a.to_string()))?;
            for (v, p) in [(&inc.tail, c.start()), (&inc.head, c.end())] {
                match points.get(v) {
                    Some(q) if q.as_slice() != p => {
                        return Err(Error::InvalidGesture(format!(
                            "arrows disagree on the point of vertex `{v}`"
                        )))
                    }
                    Some(_) => {}
                    None => {
                        points.insert(v.clone(), p.to_vec());
                    }
                }
            }
        }
        if let Some(v) = skeleton.vertices().find(|v| !points.contains_key(*v)) {
            return Err(Error::InvalidGesture(format!(
                "vertex `{v}` has no incident arrow to read its point from"
            )));
        }
        Self::new(skeleton, space, points, arrow_curves, flavor)
    }

    pub fn skeleton(&self) -> &Digraph {
        &self.skeleton
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn vertex_points(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.vertex_points
    }

    pub fn arrow_curves(&self) -> &BTreeMap<String, Curve> {
        &self.arrow_curves
    }

    pub fn vertex_point(&self, v: &str) -> Option<&[f64]> {
        self.vertex_points.get(v).map(Vec::as_slice)
    }

    pub fn curve(&self, arrow: &str) -> Option<&Curve> {
        self.arrow_curves.get(arrow)
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Largest declared speed bound over the arrow curves.
    pub fn speed_bound(&self) -> Option<f64> {
        self.arrow_curves
            .values()
            .filter_map(|c| c.continuity().speed_bound())
            .reduce(f64::max)
    }

    /// Relabels the flavor and the continuity of every curve. A physical
    /// relabel declares `speed_bound` on all curves.
    pub fn with_flavor(&self, flavor: Flavor, speed_bound: Option<f64>) -> Self {
        let continuity = match flavor {
            Flavor::Symbolic => Continuity::PiecewiseWithJumps,
            Flavor::Physical => Continuity::Continuous { speed_bound },
        };
        let mut out = self.clone();
        out.flavor = flavor;
        for c in out.arrow_curves.values_mut() {
            *c = c.clone().with_continuity(continuity);
        }
        out
    }

    /// Lists every violated invariant.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (a, inc) in self.skeleton.arrows() {
            let c = &self.arrow_curves[a];
            if !same_space(c.space(), &self.space) {
                violations.push(Violation::CurveSpaceMismatch {
                    arrow: a.to_string(),
                    expected: self.space.name().to_string(),
                    found: c.space().name().to_string(),
                });
            }
            for (end, v, found) in [(End::Tail, &inc.tail, c.start()), (End::Head, &inc.head, c.end())] {
                let expected = &self.vertex_points[v];
                if expected.as_slice() != found {
                    violations.push(Violation::EndpointMismatch {
                        arrow: a.to_string(),
                        end,
                        vertex: v.clone(),
                        expected: expected.clone(),
                        found: found.to_vec(),
                    });
                }
            }
            if self.flavor == Flavor::Physical {
                match c.continuity() {
                    Continuity::PiecewiseWithJumps => violations.push(Violation::NotContinuous { arrow: a.to_string() }),
                    Continuity::Continuous { speed_bound: None } => {
                        violations.push(Violation::MissingSpeedBound { arrow: a.to_string() })
                    }
                    Continuity::Continuous { speed_bound: Some(bound) } => {
                        let speed = c.max_speed();
                        if speed > bound * (1.0 + SPEED_SLACK) {
                            violations.push(Violation::SpeedBoundExceeded {
                                arrow: a.to_string(),
                                speed,
                                bound,
                            });
                        }
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    /// Applies `f` to every curve and `point` to every vertex point.
    pub(crate) fn map_parts(&self, space: SpaceRef, point: impl Fn(&[f64]) -> Vec<f64>, curve: impl Fn(&Curve) -> Result<Curve>) -> Result<Self> {
        let vertex_points = self
            .vertex_points
            .iter()
            .map(|(v, p)| (v.clone(), point(p)))
            .collect();
        let arrow_curves = self
            .arrow_curves
            .iter()
            .map(|(a, c)| Ok((a.clone(), curve(c)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            skeleton: self.skeleton.clone(),
            space,
            vertex_points,
            arrow_curves,
            flavor: self.flavor,
        })
    }
}

/// `ṁ∘g`: pushes every vertex point and curve through `m`.
pub fn apply_spacemap_to_gesture(m: &SpaceMap, g: &Gesture) -> Result<Gesture> {
    if !same_space(m.source(), g.space()) {
        return Err(Error::space_mismatch(m.source().name(), g.space().name(), "space map source"));
    }
    g.map_parts(m.target().clone(), |p| m.apply_point(p), |c| apply_spacemap_to_curve(m, c))
}

/// Largest per-arrow curve distance between two gestures on the same
/// skeleton and space.
pub fn gesture_distance_on(g: &Gesture, h: &Gesture, grid: usize) -> Result<f64> {
    if g.skeleton() != h.skeleton() {
        return Err(Error::SkeletonMismatch("gesture distance needs a shared skeleton".into()));
    }
    let mut worst: f64 = 0.0;
    for (a, c) in g.arrow_curves() {
        worst = worst.max(curve_distance_on(c, &h.arrow_curves()[a], grid)?);
    }
    Ok(worst)
}

/// [`gesture_distance_on`] with the default grid.
pub fn gesture_distance(g: &Gesture, h: &Gesture) -> Result<f64> {
    gesture_distance_on(g, h, DEFAULT_GRID)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::curvespace::{ConfigSpace, Dimension};
    use crate::skeleton::make_arrow_skeleton;

    pub fn plane() -> SpaceRef {
        ConfigSpace::new(
            "plane",
            vec![Dimension::new("x", "", 0.0, 1.0), Dimension::new("y", "", 0.0, 1.0)],
        )
        .unwrap()
    }

    pub fn line_gesture(space: &SpaceRef, a: &[f64], b: &[f64], n: usize) -> Gesture {
        let c = Curve::line(space.clone(), a, b, n, Continuity::PiecewiseWithJumps).unwrap();
        Gesture::from_curves(
            make_arrow_skeleton(),
            space.clone(),
            BTreeMap::from([("a0".to_string(), c)]),
            Flavor::Symbolic,
        )
        .unwrap()
    }
}
