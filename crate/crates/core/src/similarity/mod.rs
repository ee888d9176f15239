//! Gestural similarity: a commuting gesture morphism plus generators that
//! act the same way across it, scored by a fuzzy degree.

mod spectrum;

use serde::Serialize;

pub use spectrum::{
    render_spectrum, spectral_centroid, synthesize, SpectralFeatures, SynthesisMapping, CARRIER_HZ, SAMPLE_RATE,
};

use crate::check::CheckOptions;
use crate::curvespace::same_space;
use crate::error::{Error, Result};
use crate::gesture::{check_morphism_on, gesture_distance_on, linear_homotopy, Gesture, GestureMorphism};
use crate::potential::{apply_potential, compose_horizontal, PotentialOperator};

pub const DEFAULT_R0: f64 = 0.1;
pub const SPECTRAL_THRESHOLD: f64 = 0.9;

/// The dynamics that produced a gesture, optionally with the gesture it
/// was applied to.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub operator: PotentialOperator,
    pub base: Option<Gesture>,
}

impl Generator {
    pub fn new(operator: PotentialOperator) -> Self {
        Self { operator, base: None }
    }

    pub fn with_base(mut self, base: Gesture) -> Self {
        self.base = Some(base);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityQuery {
    pub g: Gesture,
    pub g_generator: Option<Generator>,
    pub h: Gesture,
    pub h_generator: Option<Generator>,
    pub morphism: GestureMorphism,
    pub eta: f64,
    pub r0: f64,
    /// Amplitude mappings for `g` and `h`; enables the spectral cosine.
    pub synthesis: Option<(SynthesisMapping, SynthesisMapping)>,
}

impl SimilarityQuery {
    pub fn new(g: Gesture, h: Gesture, morphism: GestureMorphism) -> Self {
        Self {
            g,
            g_generator: None,
            h,
            h_generator: None,
            eta: morphism.tolerance(),
            morphism,
            r0: DEFAULT_R0,
            synthesis: None,
        }
    }

    pub fn generators(mut self, g: Generator, h: Generator) -> Self {
        self.g_generator = Some(g);
        self.h_generator = Some(h);
        self
    }

    pub fn eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn r0(mut self, r0: f64) -> Self {
        self.r0 = r0;
        self
    }

    pub fn synthesis(mut self, g: SynthesisMapping, h: SynthesisMapping) -> Self {
        self.synthesis = Some((g, h));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    /// `max_a d(ṁ g(a), h(t a))`.
    pub clause1_residual: f64,
    /// `max_c d(ṁ F_g c, F_h ṁ c)` over the probe set.
    pub clause2_residual: f64,
    pub similar: bool,
    pub degree: f64,
    pub eta: f64,
    pub r0: f64,
    pub generator_labels: (String, String),
    pub labels_agree: bool,
    /// `d(F_g(g₀), g)` when a base is supplied; informational.
    pub generator_residual_g: Option<f64>,
    pub generator_residual_h: Option<f64>,
    pub spectral_delta_cosine: Option<f64>,
}

/// `exp(−(r₁ + r₂)/r₀)`.
pub fn similarity_degree(clause1: f64, clause2: f64, r0: f64) -> f64 {
    (-(clause1 + clause2) / r0).exp()
}

pub fn check_similarity(q: &SimilarityQuery, opts: &CheckOptions) -> Result<SimilarityReport> {
    if !(q.eta.is_finite() && q.eta >= 0.0) {
        return Err(Error::ConfigInvalid(format!("tolerance must be nonnegative, got {}", q.eta)));
    }
    if !(q.r0.is_finite() && q.r0 > 0.0) {
        return Err(Error::ConfigInvalid(format!("degree scale must be positive, got {}", q.r0)));
    }
    let fg = q
        .g_generator
        .as_ref()
        .ok_or_else(|| Error::MissingGenerator("the source gesture".into()))?;
    let fh = q
        .h_generator
        .as_ref()
        .ok_or_else(|| Error::MissingGenerator("the target gesture".into()))?;
    for (gen, gesture, role) in [(fg, &q.g, "source"), (fh, &q.h, "target")] {
        if !same_space(gen.operator.space(), gesture.space()) {
            return Err(Error::space_mismatch(
                gesture.space().name(),
                gen.operator.space().name(),
                format!("generator `{}` of the {role} gesture", gen.operator.label()),
            ));
        }
    }
    let clause1 = check_morphism_on(&q.morphism, &q.g, &q.h, opts.grid)?.residual;
    let square_opts = CheckOptions {
        tolerance: q.eta,
        ..opts.clone()
    };
    let clause2 = compose_horizontal(&fg.operator, q.morphism.space_map(), &fh.operator, &square_opts)?.residual;
    let triangle = |gen: &Generator, gesture: &Gesture| -> Result<Option<f64>> {
        match &gen.base {
            Some(base) => Ok(Some(gesture_distance_on(&apply_potential(&gen.operator, base)?, gesture, opts.grid)?)),
            None => Ok(None),
        }
    };
    let spectral_delta_cosine = match (&q.synthesis, &fg.base, &fh.base) {
        (Some((gm, hm)), Some(g0), Some(h0)) => {
            let dg = feature_delta(&render_spectrum(g0, gm)?, &render_spectrum(&q.g, gm)?);
            let dh = feature_delta(&render_spectrum(h0, hm)?, &render_spectrum(&q.h, hm)?);
            Some(delta_cosine(&dg, &dh))
        }
        _ => None,
    };
    Ok(SimilarityReport {
        clause1_residual: clause1,
        clause2_residual: clause2,
        similar: clause1 <= q.eta && clause2 <= q.eta,
        degree: similarity_degree(clause1, clause2, q.r0),
        eta: q.eta,
        r0: q.r0,
        generator_labels: (fg.operator.label().to_string(), fh.operator.label().to_string()),
        labels_agree: fg.operator.label() == fh.operator.label(),
        generator_residual_g: triangle(fg, &q.g)?,
        generator_residual_h: triangle(fh, &q.h)?,
        spectral_delta_cosine,
    })
}

/// Relative change of each feature, `(f₁ − f₀)/max(|f₀|, |f₁|)`.
pub fn feature_delta(before: &SpectralFeatures, after: &SpectralFeatures) -> [f64; 3] {
    let (a, b) = (before.to_vec(), after.to_vec());
    let mut out = [0.0; 3];
    for k in 0..3 {
        let scale = a[k].abs().max(b[k].abs());
        out[k] = if scale > 0.0 { (b[k] - a[k]) / scale } else { 0.0 };
    }
    out
}

/// Cosine of two delta vectors; 1 when both vanish, 0 when only one does.
pub fn delta_cosine(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    match (na > 0.0, nb > 0.0) {
        (false, false) => 1.0,
        (true, true) => a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb),
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub g_connectable: bool,
    pub h_connectable: bool,
    pub delta_g: [f64; 3],
    pub delta_h: [f64; 3],
    pub cosine: f64,
    pub threshold: f64,
    pub spectrally_similar: bool,
    pub verdict: String,
}

/// Parameters at which homotopy members are validated.
const CONNECTABILITY_STEPS: usize = 11;

fn connectable(a: &Gesture, b: &Gesture) -> Result<bool> {
    let family = linear_homotopy(a, b)?;
    Ok(family
        .sample(CONNECTABILITY_STEPS)
        .iter()
        .all(|(_, member)| member.validate().is_valid()))
}

/// Compares the spectral change `g₀ → g₁` with `h₀ → h₁`, next to whether
/// each pair is joined by a valid homotopy.
pub fn conjecture_check(
    g0: &Gesture,
    g1: &Gesture,
    h0: &Gesture,
    h1: &Gesture,
    g_mapping: &SynthesisMapping,
    h_mapping: &SynthesisMapping,
) -> Result<ConjectureReport> {
    let g_connectable = connectable(g0, g1)?;
    let h_connectable = connectable(h0, h1)?;
    let delta_g = feature_delta(&render_spectrum(g0, g_mapping)?, &render_spectrum(g1, g_mapping)?);
    let delta_h = feature_delta(&render_spectrum(h0, h_mapping)?, &render_spectrum(h1, h_mapping)?);
    let cosine = delta_cosine(&delta_g, &delta_h);
    let spectrally_similar = cosine >= SPECTRAL_THRESHOLD;
    let verdict = match (g_connectable && h_connectable, spectrally_similar) {
        (true, true) => "homotopic in space and spectrally similar",
        (true, false) => "homotopic in space but not similar",
        (false, _) => "not homotopy-connectable",
    };
    Ok(ConjectureReport {
        g_connectable,
        h_connectable,
        delta_g,
        delta_h,
        cosine,
        threshold: SPECTRAL_THRESHOLD,
        spectrally_similar,
        verdict: verdict.into(),
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::curvespace::{ConfigSpace, Continuity, Curve, Dimension, SpaceMap, SpaceRef};
    use crate::gesture::{apply_spacemap_to_gesture, Flavor};
    use crate::potential::{forte, piano};
    use crate::skeleton::{make_arrow_skeleton, DigraphMorphism};

    fn instrument(name: &str) -> SpaceRef {
        ConfigSpace::new(
            name,
            vec![
                Dimension::new("time", "s", 0.0, 1.0),
                Dimension::new("height", "mm", 0.0, 100.0),
                Dimension::new("loudness", "", 0.0, 1.0),
            ],
        )
        .unwrap()
    }

    fn bump(space: &SpaceRef) -> Gesture {
        let c = Curve::from_fn(space.clone(), 65, Continuity::PiecewiseWithJumps, |t| {
            vec![t, 40.0 + 20.0 * (std::f64::consts::PI * t).sin(), 0.2 + 0.4 * t * (1.0 - t)]
        })
        .unwrap();
        Gesture::from_curves(
            make_arrow_skeleton(),
            space.clone(),
            BTreeMap::from([("a0".to_string(), c)]),
            Flavor::Symbolic,
        )
        .unwrap()
    }

    fn identity_morphism(g: &Gesture) -> GestureMorphism {
        GestureMorphism::identity(g).with_tolerance(1e-2)
    }

    #[test]
    fn identity_case_is_fully_similar() {
        let s = instrument("piano");
        let base = bump(&s);
        let f = forte(&s).unwrap();
        let g = apply_potential(&f, &base).unwrap();
        let gen = Generator::new(f).with_base(base);
        let q = SimilarityQuery::new(g.clone(), g.clone(), identity_morphism(&g)).generators(gen.clone(), gen);
        let r = check_similarity(&q, &CheckOptions::default()).unwrap();
        assert!(r.similar);
        assert_eq!(r.degree, 1.0);
        assert_eq!(r.generator_residual_g, Some(0.0));
    }

    #[test]
    fn unspecified_dynamics() {
        let s = instrument("percussion");
        let g = bump(&s);
        let q = SimilarityQuery::new(g.clone(), g.clone(), identity_morphism(&g));
        assert!(matches!(
            check_similarity(&q, &CheckOptions::default()),
            Err(Error::MissingGenerator(_))
        ));
    }

    #[test]
    fn forte_and_piano_do_not_act_alike() {
        let s = instrument("percussion");
        let base = bump(&s);
        let (f, p) = (forte(&s).unwrap(), piano(&s).unwrap());
        let g = apply_potential(&f, &base).unwrap();
        let h = apply_potential(&p, &base).unwrap();
        let q = SimilarityQuery::new(g.clone(), h, identity_morphism(&g))
            .generators(Generator::new(f), Generator::new(p));
        let r = check_similarity(&q, &CheckOptions::default()).unwrap();
        assert!(!r.similar);
        assert!(r.clause2_residual > r.eta);
        assert!(!r.labels_agree);
        assert!(r.degree < 1.0);
    }

    #[test]
    fn generator_outside_its_space() {
        let piano_space = instrument("piano");
        let flute = instrument("flute");
        let g = bump(&flute);
        let q = SimilarityQuery::new(g.clone(), g.clone(), identity_morphism(&g)).generators(
            Generator::new(forte(&piano_space).unwrap()),
            Generator::new(forte(&flute).unwrap()),
        );
        assert!(matches!(
            check_similarity(&q, &CheckOptions::default()),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn inversion_symmetry() {
        let x = instrument("piano");
        let y = instrument("violin");
        let m = SpaceMap::affine(
            x.clone(),
            y.clone(),
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.8, 0.0], vec![0.0, 0.0, 1.25]],
            vec![0.0, 5.0, 0.0],
        )
        .unwrap();
        let g = bump(&x);
        let h = apply_spacemap_to_gesture(&m, &g).unwrap();
        let gm = GestureMorphism::new(DigraphMorphism::identity(g.skeleton()), m, 1e-6).unwrap();
        let there = SimilarityQuery::new(g.clone(), h.clone(), gm.clone())
            .generators(Generator::new(forte(&x).unwrap()), Generator::new(forte(&y).unwrap()));
        let back = SimilarityQuery::new(h, g, gm.inverse().unwrap())
            .generators(Generator::new(forte(&y).unwrap()), Generator::new(forte(&x).unwrap()));
        let a = check_similarity(&there, &CheckOptions::default()).unwrap();
        let b = check_similarity(&back, &CheckOptions::default()).unwrap();
        assert!(a.similar);
        assert_eq!(a.similar, b.similar);
    }

    #[test]
    fn degree_is_monotone() {
        assert_eq!(similarity_degree(0.0, 0.0, 0.1), 1.0);
        let mut last = 1.0;
        for k in 1..20 {
            let d = similarity_degree(k as f64 * 0.01, 0.02, 0.1);
            assert!(d < last && d > 0.0);
            last = d;
        }
    }

    #[test]
    fn cosine_conventions() {
        assert_eq!(delta_cosine(&[0.0; 3], &[0.0; 3]), 1.0);
        assert_eq!(delta_cosine(&[1.0, 0.0, 0.0], &[0.0; 3]), 0.0);
        assert!((delta_cosine(&[1.0, 2.0, 0.0], &[2.0, 4.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identical_pairs_agree() {
        let s = instrument("piano");
        let g0 = bump(&s);
        let g1 = apply_potential(&forte(&s).unwrap(), &g0).unwrap();
        let map = SynthesisMapping::new("loudness");
        let r = conjecture_check(&g0, &g1, &g0, &g1, &map, &map).unwrap();
        assert_eq!(r.cosine, 1.0);
        assert!(r.g_connectable && r.spectrally_similar);
    }
}
