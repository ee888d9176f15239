use std::collections::BTreeMap;

use serde::Serialize;

use super::{apply_spacemap_to_gesture, Gesture};
use crate::check::CONSTRUCTED_TOLERANCE;
use crate::curvespace::{curve_distance_on, same_space, SpaceMap, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::skeleton::DigraphMorphism;

/// A pair `(t, m)` asking for `ṁ∘g = h∘t` within `tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureMorphism {
    t: DigraphMorphism,
    m: SpaceMap,
    tolerance: f64,
}

impl GestureMorphism {
    pub fn new(t: DigraphMorphism, m: SpaceMap, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::ConfigInvalid(format!(
                "morphism tolerance must be finite and nonnegative, got {tolerance}"
            )));
        }
        Ok(Self { t, m, tolerance })
    }

    /// `(id, id)` on `g`'s skeleton and space.
    pub fn identity(g: &Gesture) -> Self {
        Self {
            t: DigraphMorphism::identity(g.skeleton()),
            m: SpaceMap::identity(g.space()),
            tolerance: CONSTRUCTED_TOLERANCE,
        }
    }

    pub fn skeleton_map(&self) -> &DigraphMorphism {
        &self.t
    }

    pub fn space_map(&self) -> &SpaceMap {
        &self.m
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// `next ∘ self`. The tolerance follows the residual bound
    /// `r₂ + L(m₂)·r₁`, or `r₂ + r₁` when `m₂` has no known Lipschitz constant.
    pub fn then(&self, next: &GestureMorphism) -> Result<GestureMorphism> {
        let t = self.t.then(&next.t)?;
        let m = self.m.then(&next.m)?;
        let gain = next.m.lipschitz_bound().unwrap_or(1.0);
        Self::new(t, m, next.tolerance + gain * self.tolerance)
    }

    /// Returns `(t⁻¹, m⁻¹)` when `t` is bijective and `m` invertible.
    pub fn inverse(&self) -> Result<GestureMorphism> {
        let t = &self.t;
        let bijective = t.vertex_map().len() == t.target().vertex_count()
            && t.arrow_map().len() == t.target().arrow_count()
            && unique(t.vertex_map().values())
            && unique(t.arrow_map().values());
        if !bijective {
            return Err(Error::StructuralMismatch("skeleton map is not invertible".into()));
        }
        let flip = |map: &BTreeMap<String, String>| map.iter().map(|(k, v)| (v.clone(), k.clone())).collect();
        let t_inv = DigraphMorphism::new(
            t.target().clone(),
            t.source().clone(),
            flip(t.vertex_map()),
            flip(t.arrow_map()),
        )?;
        Self::new(t_inv, self.m.inverse()?, self.tolerance)
    }
}

fn unique<'a>(values: impl Iterator<Item = &'a String>) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    values.into_iter().all(|v| seen.insert(v))
}

/// Residuals of one commuting-square check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorphismReport {
    pub residual: f64,
    pub per_arrow: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub commutes: bool,
}

/// [`check_morphism_on`] with the default grid.
pub fn check_morphism(gm: &GestureMorphism, g: &Gesture, h: &Gesture) -> Result<MorphismReport> {
    check_morphism_on(gm, g, h, DEFAULT_GRID)
}

/// Residual `max_a d(ṁ(g(a)), h(t(a)))` over the arrows of `g`.
pub fn check_morphism_on(gm: &GestureMorphism, g: &Gesture, h: &Gesture, grid: usize) -> Result<MorphismReport> {
    if gm.t.source() != g.skeleton() {
        return Err(Error::StructuralMismatch(
            "skeleton map source differs from the source gesture's skeleton".into(),
        ));
    }
    if gm.t.target() != h.skeleton() {
        return Err(Error::StructuralMismatch(
            "skeleton map target differs from the target gesture's skeleton".into(),
        ));
    }
    if !same_space(gm.m.source(), g.space()) {
        return Err(Error::StructuralMismatch(format!(
            "space map starts in `{}` but the source gesture lives in `{}`",
            gm.m.source().name(),
            g.space().name()
        )));
    }
    if !same_space(gm.m.target(), h.space()) {
        return Err(Error::StructuralMismatch(format!(
            "space map ends in `{}` but the target gesture lives in `{}`",
            gm.m.target().name(),
            h.space().name()
        )));
    }
    let mapped = apply_spacemap_to_gesture(&gm.m, g)?;
    let mut per_arrow = BTreeMap::new();
    let mut residual: f64 = 0.0;
    for (a, c) in mapped.arrow_curves() {
        let target_arrow = gm.t.map_arrow(a).expect("total skeleton map");
        let d = curve_distance_on(c, &h.arrow_curves()[target_arrow], grid)?;
        residual = residual.max(d);
        per_arrow.insert(a.clone(), d);
    }
    Ok(MorphismReport {
        residual,
        per_arrow,
        tolerance: gm.tolerance,
        commutes: residual <= gm.tolerance,
    })
}
