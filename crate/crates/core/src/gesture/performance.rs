use super::{Flavor, Gesture};
use crate::curvespace::{grid_time, lerp, Continuity, Curve};
use crate::error::{Error, Result};

/// Keeps the limited arc length strictly under the bound despite round-off.
const SPEED_MARGIN: f64 = 1e-9;

/// Turns a symbolic gesture into a physical one with discrete speed at most
/// `speed_bound`: each curve gets `passes` rounds of a 3-point moving
/// average with fixed ends, is pulled toward its chord if it is too long to
/// traverse in unit time, and is reparametrized by arc length when some
/// stretch is still too fast. Vertex points and curve endpoints are kept
/// bitwise.
pub fn performance_smooth(g: &Gesture, speed_bound: f64, passes: usize) -> Result<Gesture> {
    if g.flavor() != Flavor::Symbolic {
        return Err(Error::InvalidGesture("performance smoothing expects a symbolic gesture".into()));
    }
    if !(speed_bound.is_finite() && speed_bound > 0.0) {
        return Err(Error::ConfigInvalid(format!("speed bound must be positive, got {speed_bound}")));
    }
    if passes == 0 {
        return Err(Error::ConfigInvalid("at least one smoothing pass is needed".into()));
    }
    let space = g.space().clone();
    let mut out = g.clone();
    out.flavor = Flavor::Physical;
    for (a, c) in g.arrow_curves() {
        let chord = space.normalized_distance(c.start(), c.end());
        if chord > speed_bound {
            return Err(Error::InfeasibleSpeed {
                arrow: a.clone(),
                required: chord,
                bound: speed_bound,
            });
        }
        let mut samples = c.samples().to_vec();
        for _ in 0..passes {
            samples = moving_average(&samples);
        }
        let target = speed_bound * (1.0 - SPEED_MARGIN);
        let smoothed = Curve::from_parts(space.clone(), samples, Continuity::PiecewiseWithJumps);
        let length = smoothed.arc_length();
        let mut samples = smoothed.samples().to_vec();
        if length > target && length > chord {
            let mu = ((length - target) / (length - chord)).clamp(0.0, 1.0);
            let n = samples.len();
            for (i, p) in samples.iter_mut().enumerate() {
                let on_chord = lerp(c.start(), c.end(), grid_time(i, n));
                *p = lerp(p, &on_chord, mu);
            }
        }
        let mut curve = Curve::from_parts(space.clone(), samples, Continuity::PiecewiseWithJumps);
        if curve.max_speed() > target {
            curve = reparametrize_by_arc_length(&curve);
        }
        let mut samples = curve.samples().to_vec();
        let n = samples.len();
        samples[0] = c.start().to_vec();
        samples[n - 1] = c.end().to_vec();
        let continuity = Continuity::Continuous {
            speed_bound: Some(speed_bound),
        };
        out.arrow_curves
            .insert(a.clone(), Curve::from_parts(space.clone(), samples, continuity));
    }
    Ok(out)
}

fn moving_average(samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = samples.len();
    let mut out = samples.to_vec();
    for i in 1..n.saturating_sub(1) {
        out[i] = samples[i - 1]
            .iter()
            .zip(&samples[i])
            .zip(&samples[i + 1])
            .map(|((a, b), c)| (a + b + c) / 3.0)
            .collect();
    }
    out
}

/// Resamples so consecutive samples are equally spaced along the polyline.
fn reparametrize_by_arc_length(c: &Curve) -> Curve {
    let space = c.space();
    let pts = c.samples();
    let n = pts.len();
    let mut cumulative = Vec::with_capacity(n);
    cumulative.push(0.0);
    for w in pts.windows(2) {
        let last = *cumulative.last().expect("non-empty");
        cumulative.push(last + space.normalized_distance(&w[0], &w[1]));
    }
    let total = cumulative[n - 1];
    if total.is_nan() || total <= 0.0 {
        return c.clone();
    }
    let mut samples = Vec::with_capacity(n);
    let mut k = 0;
    for j in 0..n {
        let s = total * grid_time(j, n);
        while k + 2 < n && cumulative[k + 1] < s {
            k += 1;
        }
        let seg = cumulative[k + 1] - cumulative[k];
        let frac = if seg > 0.0 { ((s - cumulative[k]) / seg).clamp(0.0, 1.0) } else { 0.0 };
        samples.push(lerp(&pts[k], &pts[k + 1], frac));
    }
    Curve::from_parts(space.clone(), samples, c.continuity())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::super::fixtures::*;
    use super::super::gesture_distance;
    use super::*;
    use crate::skeleton::make_arrow_skeleton;

    fn step(n: usize) -> Gesture {
        let space = plane();
        let c = Curve::from_fn(space.clone(), n, Continuity::PiecewiseWithJumps, |t| {
            vec![t, if t < 0.5 { 0.1 } else { 0.9 }]
        })
        .unwrap();
        Gesture::from_curves(
            make_arrow_skeleton(),
            space,
            BTreeMap::from([("a0".to_string(), c)]),
            Flavor::Symbolic,
        )
        .unwrap()
    }

    #[test]
    fn step_becomes_physical() {
        let g = step(64);
        let p = performance_smooth(&g, 2.0, 3).unwrap();
        assert!(p.validate().is_valid());
        assert_eq!(p.flavor(), Flavor::Physical);
        assert!(p.arrow_curves()["a0"].max_speed() <= 2.0);
        assert_eq!(p.arrow_curves()["a0"].start(), g.arrow_curves()["a0"].start());
        assert_eq!(p.arrow_curves()["a0"].end(), g.arrow_curves()["a0"].end());
        assert_eq!(p.vertex_points(), g.vertex_points());
    }

    #[test]
    fn tight_bound_pulls_toward_chord() {
        let g = step(64);
        let chord = (1.0f64 + 0.64).sqrt();
        let p = performance_smooth(&g, chord * 1.001, 1).unwrap();
        assert!(p.validate().is_valid());
    }

    #[test]
    fn slow_smooth_input_barely_moves() {
        let g = line_gesture(&plane(), &[0.1, 0.2], &[0.4, 0.3], 65);
        let p = performance_smooth(&g, 5.0, 2).unwrap();
        assert!(gesture_distance(&g, &p).unwrap() < 1e-2);
    }

    #[test]
    fn infeasible_chord() {
        let g = line_gesture(&plane(), &[0.0, 0.0], &[1.0, 1.0], 9);
        assert!(matches!(
            performance_smooth(&g, 1.0, 1),
            Err(Error::InfeasibleSpeed { .. })
        ));
    }

    #[test]
    fn physical_input_is_rejected() {
        let g = step(16).with_flavor(Flavor::Physical, Some(100.0));
        assert!(performance_smooth(&g, 2.0, 1).is_err());
    }
}
