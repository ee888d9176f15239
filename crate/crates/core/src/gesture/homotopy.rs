use std::collections::BTreeMap;

use super::{Flavor, Gesture};
use crate::curvespace::{resample, same_space, Continuity, Curve};
use crate::error::{Error, Result};
use crate::skeleton::Digraph;

/// How a [`HomotopyFamily`] produces its members.
#[derive(Debug, Clone, PartialEq)]
pub enum Interpolant {
    /// `(1−λ)·start + λ·end`, sample by sample.
    Linear,
    /// Piecewise-linear through gestures placed at `λ = k/(K−1)`.
    Keyframes(Vec<Gesture>),
}

/// A path `λ ↦ family(λ)` of gestures on one skeleton and space.
#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyFamily {
    start: Gesture,
    end: Gesture,
    interpolant: Interpolant,
}

impl HomotopyFamily {
    /// A keyframed family; all frames need the same skeleton, space and
    /// per-arrow sample counts.
    pub fn keyframes(frames: Vec<Gesture>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::InvalidFamily("need at least 2 keyframes".into()));
        }
        for f in &frames[1..] {
            check_compatible(&frames[0], f)?;
            if !same_sample_counts(&frames[0], f) {
                return Err(Error::InvalidFamily("keyframes differ in sample counts".into()));
            }
        }
        Ok(Self {
            start: frames[0].clone(),
            end: frames[frames.len() - 1].clone(),
            interpolant: Interpolant::Keyframes(frames),
        })
    }

    pub fn start(&self) -> &Gesture {
        &self.start
    }

    pub fn end(&self) -> &Gesture {
        &self.end
    }

    pub fn interpolant(&self) -> &Interpolant {
        &self.interpolant
    }

    /// The member at `λ` (clamped to `[0,1]`); the ends are returned as stored.
    pub fn at(&self, lambda: f64) -> Gesture {
        if lambda.is_nan() || lambda <= 0.0 {
            return self.start.clone();
        }
        if lambda >= 1.0 {
            return self.end.clone();
        }
        match &self.interpolant {
            Interpolant::Linear => mix(&self.start, &self.end, lambda),
            Interpolant::Keyframes(frames) => {
                let pos = lambda * (frames.len() - 1) as f64;
                let k = (pos.floor() as usize).min(frames.len() - 2);
                let local = pos - k as f64;
                if local == 0.0 {
                    frames[k].clone()
                } else {
                    mix(&frames[k], &frames[k + 1], local)
                }
            }
        }
    }

    /// Members at `steps` evenly spaced parameters, ends included.
    pub fn sample(&self, steps: usize) -> Vec<(f64, Gesture)> {
        let steps = steps.max(2);
        (0..steps)
            .map(|i| {
                let lambda = crate::curvespace::grid_time(i, steps);
                (lambda, self.at(lambda))
            })
            .collect()
    }
}

fn check_compatible(g: &Gesture, h: &Gesture) -> Result<()> {
    if g.skeleton() != h.skeleton() {
        return Err(Error::SkeletonMismatch("homotopy ends need the same skeleton".into()));
    }
    if !same_space(g.space(), h.space()) {
        return Err(Error::space_mismatch(g.space().name(), h.space().name(), "homotopy ends"));
    }
    Ok(())
}

fn same_sample_counts(g: &Gesture, h: &Gesture) -> bool {
    g.arrow_curves()
        .iter()
        .all(|(a, c)| c.len() == h.arrow_curves()[a].len())
}

/// Straight-line family from `g` to `h`. Arrows whose sample counts differ
/// are resampled to the larger count first.
pub fn linear_homotopy(g: &Gesture, h: &Gesture) -> Result<HomotopyFamily> {
    check_compatible(g, h)?;
    let (start, end) = if same_sample_counts(g, h) {
        (g.clone(), h.clone())
    } else {
        align(g, h)
    };
    Ok(HomotopyFamily {
        start,
        end,
        interpolant: Interpolant::Linear,
    })
}

fn align(g: &Gesture, h: &Gesture) -> (Gesture, Gesture) {
    let mut gc = g.clone();
    let mut hc = h.clone();
    for (a, c) in g.arrow_curves() {
        let d = &h.arrow_curves()[a];
        let n = c.len().max(d.len());
        gc.arrow_curves.insert(a.clone(), resample(c, n));
        hc.arrow_curves.insert(a.clone(), resample(d, n));
    }
    (gc, hc)
}

/// `(1−λ)a + λb`; returns `a` untouched where the two agree.
fn mix_value(a: f64, b: f64, lambda: f64) -> f64 {
    if a == b {
        a
    } else {
        (1.0 - lambda) * a + lambda * b
    }
}

fn mix_point(a: &[f64], b: &[f64], lambda: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| mix_value(x, y, lambda)).collect()
}

fn mix(g: &Gesture, h: &Gesture, lambda: f64) -> Gesture {
    let physical = g.flavor() == Flavor::Physical && h.flavor() == Flavor::Physical;
    let continuity = if physical {
        let bound = match (g.speed_bound(), h.speed_bound()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        Continuity::Continuous { speed_bound: bound }
    } else {
        Continuity::PiecewiseWithJumps
    };
    let vertex_points: BTreeMap<String, Vec<f64>> = g
        .vertex_points()
        .iter()
        .map(|(v, p)| (v.clone(), mix_point(p, &h.vertex_points()[v], lambda)))
        .collect();
    let arrow_curves = g
        .arrow_curves()
        .iter()
        .map(|(a, c)| {
            let d = &h.arrow_curves()[a];
            let samples = c
                .samples()
                .iter()
                .zip(d.samples())
                .map(|(p, q)| mix_point(p, q, lambda))
                .collect();
            (a.clone(), Curve::from_parts(g.space().clone(), samples, continuity))
        })
        .collect();
    Gesture {
        skeleton: g.skeleton().clone(),
        space: g.space().clone(),
        vertex_points,
        arrow_curves,
        flavor: if physical { Flavor::Physical } else { Flavor::Symbolic },
    }
}

/// Sample-level equality: skeleton, space, vertex points and curve samples.
pub(crate) fn same_body(g: &Gesture, h: &Gesture) -> bool {
    g.skeleton() == h.skeleton()
        && same_space(g.space(), h.space())
        && g.vertex_points() == h.vertex_points()
        && g
            .arrow_curves()
            .iter()
            .all(|(a, c)| c.samples() == h.arrow_curves()[a].samples())
}

/// A gesture of gestures: vertices carry gestures and arrows carry families
/// joining the tail gesture to the head gesture.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergesture {
    skeleton: Digraph,
    vertex_gestures: BTreeMap<String, Gesture>,
    arrow_paths: BTreeMap<String, HomotopyFamily>,
}

impl Hypergesture {
    pub fn new(
        skeleton: Digraph,
        vertex_gestures: BTreeMap<String, Gesture>,
        arrow_paths: BTreeMap<String, HomotopyFamily>,
    ) -> Result<Self> {
        if vertex_gestures.len() != skeleton.vertex_count() || !skeleton.vertices().all(|v| vertex_gestures.contains_key(v)) {
            return Err(Error::InvalidGesture("vertex gestures must cover the skeleton vertices".into()));
        }
        if arrow_paths.len() != skeleton.arrow_count() || !skeleton.arrows().all(|(a, _)| arrow_paths.contains_key(a)) {
            return Err(Error::InvalidGesture("arrow paths must cover the skeleton arrows".into()));
        }
        let mut members = vertex_gestures.values();
        if let Some(first) = members.next() {
            for g in members {
                check_compatible(first, g)?;
            }
        }
        for (a, inc) in skeleton.arrows() {
            let path = &arrow_paths[a];
            if !same_body(path.start(), &vertex_gestures[&inc.tail]) {
                return Err(Error::InvalidFamily(format!(
                    "path on `{a}` does not start at the gesture of `{}`",
                    inc.tail
                )));
            }
            if !same_body(path.end(), &vertex_gestures[&inc.head]) {
                return Err(Error::InvalidFamily(format!(
                    "path on `{a}` does not end at the gesture of `{}`",
                    inc.head
                )));
            }
        }
        Ok(Self {
            skeleton,
            vertex_gestures,
            arrow_paths,
        })
    }

    pub fn skeleton(&self) -> &Digraph {
        &self.skeleton
    }

    pub fn vertex_gestures(&self) -> &BTreeMap<String, Gesture> {
        &self.vertex_gestures
    }

    pub fn arrow_paths(&self) -> &BTreeMap<String, HomotopyFamily> {
        &self.arrow_paths
    }
}

/// The member gesture at `s` along the path of `arrow`.
pub fn evaluate_hypergesture(hg: &Hypergesture, arrow: &str, s: f64) -> Result<Gesture> {
    let path = hg
        .arrow_paths
        .get(arrow)
        .ok_or_else(|| Error::UnknownArrow(arrow.to_string()))?;
    Ok(path.at(s))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::curvespace::{ConfigSpace, Dimension};
    use crate::skeleton::{chain, make_arrow_skeleton};

    fn axis() -> crate::curvespace::SpaceRef {
        ConfigSpace::new("axis", vec![Dimension::new("x", "", 0.0, 4.0)]).unwrap()
    }

    #[test]
    fn ends_are_exact() {
        let s = plane();
        let g = line_gesture(&s, &[0.0, 0.0], &[1.0, 0.3], 9);
        let h = line_gesture(&s, &[0.2, 0.1], &[0.7, 0.9], 9);
        let fam = linear_homotopy(&g, &h).unwrap();
        assert_eq!(fam.at(0.0), g);
        assert_eq!(fam.at(1.0), h);
    }

    #[test]
    fn midpoint_of_two_lines() {
        let s = axis();
        let g = line_gesture(&s, &[0.0], &[1.0], 5);
        let h = line_gesture(&s, &[0.0], &[3.0], 5);
        let mid = linear_homotopy(&g, &h).unwrap().at(0.5);
        let expected = line_gesture(&s, &[0.0], &[2.0], 5);
        assert_eq!(mid.arrow_curves()["a0"].samples(), expected.arrow_curves()["a0"].samples());
    }

    #[test]
    fn every_member_is_valid() {
        let s = plane();
        let g = line_gesture(&s, &[0.0, 0.0], &[1.0, 0.3], 9);
        let h = line_gesture(&s, &[0.2, 0.1], &[0.7, 0.9], 33);
        let fam = linear_homotopy(&g, &h).unwrap();
        for (_, member) in fam.sample(101) {
            assert!(member.validate().is_valid());
        }
    }

    #[test]
    fn reflexive_and_symmetric() {
        let s = plane();
        let g = line_gesture(&s, &[0.0, 0.0], &[1.0, 0.3], 9);
        let h = line_gesture(&s, &[0.2, 0.1], &[0.7, 0.9], 9);
        let refl = linear_homotopy(&g, &g).unwrap();
        let there = linear_homotopy(&g, &h).unwrap();
        let back = linear_homotopy(&h, &g).unwrap();
        for k in 0..=16 {
            let lambda = k as f64 / 16.0;
            assert_eq!(refl.at(lambda), g);
            assert_eq!(there.at(lambda), back.at(1.0 - lambda));
        }
    }

    #[test]
    fn mismatched_skeleta_are_rejected() {
        let s = plane();
        let g = line_gesture(&s, &[0.0, 0.0], &[1.0, 0.3], 9);
        let c = g.arrow_curves()["a0"].clone();
        let k = Gesture::from_curves(
            chain(2),
            s.clone(),
            BTreeMap::from([("a0".to_string(), c.clone()), ("a1".to_string(), Curve::line(s, c.end(), c.end(), 3, Continuity::PiecewiseWithJumps).unwrap())]),
            Flavor::Symbolic,
        )
        .unwrap();
        assert!(matches!(linear_homotopy(&g, &k), Err(Error::SkeletonMismatch(_))));
    }

    #[test]
    fn hypergesture_endpoints() {
        let s = plane();
        let g = line_gesture(&s, &[0.0, 0.0], &[1.0, 0.3], 9);
        let h = line_gesture(&s, &[0.2, 0.1], &[0.7, 0.9], 9);
        let fam = linear_homotopy(&g, &h).unwrap();
        let hg = Hypergesture::new(
            make_arrow_skeleton(),
            BTreeMap::from([("v0".to_string(), g.clone()), ("v1".to_string(), h.clone())]),
            BTreeMap::from([("a0".to_string(), fam.clone())]),
        )
        .unwrap();
        assert_eq!(evaluate_hypergesture(&hg, "a0", 0.0).unwrap(), g);
        assert_eq!(evaluate_hypergesture(&hg, "a0", 1.0).unwrap(), h);
        assert_eq!(evaluate_hypergesture(&hg, "a0", 0.5).unwrap(), fam.at(0.5));
        assert!(matches!(evaluate_hypergesture(&hg, "zz", 0.5), Err(Error::UnknownArrow(_))));
    }

    #[test]
    fn hypergesture_rejects_detached_path() {
        let s = plane();
        let g = line_gesture(&s, &[0.0, 0.0], &[1.0, 0.3], 9);
        let h = line_gesture(&s, &[0.2, 0.1], &[0.7, 0.9], 9);
        let fam = linear_homotopy(&h, &g).unwrap();
        assert!(Hypergesture::new(
            make_arrow_skeleton(),
            BTreeMap::from([("v0".to_string(), g), ("v1".to_string(), h)]),
            BTreeMap::from([("a0".to_string(), fam)]),
        )
        .is_err());
    }

    #[test]
    fn keyframes_pass_through_frames() {
        let s = axis();
        let frames: Vec<Gesture> = (0..3).map(|k| line_gesture(&s, &[0.0], &[k as f64 + 1.0], 5)).collect();
        let fam = HomotopyFamily::keyframes(frames.clone()).unwrap();
        assert_eq!(fam.at(0.5), frames[1]);
        let q = fam.at(0.75);
        assert_eq!(q.arrow_curves()["a0"].end(), &[2.5]);
    }
}
