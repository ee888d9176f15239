//! Potential operators: dynamics generators acting on the curves of one
//! space, their action on gestures, and the 2-cell compositions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::check::CheckOptions;
use crate::curvespace::{
    apply_spacemap_to_curve, curve_distance_on, grid_time, probe_curves, same_space, Continuity, Curve, SpaceMap,
    SpaceRef,
};
use crate::error::{Error, Result};
use crate::gesture::{Gesture, HomotopyFamily};

/// Loudness gain of the `forte` preset.
pub const FORTE_GAIN: f64 = 1.6;
/// Loudness gain of the `piano` preset.
pub const PIANO_GAIN: f64 = 0.6;
/// Strength `s` of the forte attack warp `w(t) = t + s·t(1−t)`.
pub const ATTACK_WARP: f64 = 0.3;
/// Node count of preset time warps.
pub const WARP_SAMPLES: usize = 65;

/// One step of a potential operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorKind {
    /// Multiplies the named coordinates by `factor`.
    AmplitudeScale { coords: Vec<String>, factor: f64 },
    /// Adds a constant to each named coordinate.
    Offset { offsets: BTreeMap<String, f64> },
    /// Reparametrizes curves as `c ↦ c∘w`, with `w` given by values on a
    /// uniform grid of `[0,1]`.
    TimeWarp { samples: Vec<f64> },
    /// Steps applied in order.
    Composite { steps: Vec<OperatorKind> },
}

impl OperatorKind {
    pub fn identity() -> Self {
        OperatorKind::Composite { steps: Vec::new() }
    }

    fn flatten_into(&self, out: &mut Vec<OperatorKind>) {
        match self {
            OperatorKind::Composite { steps } => steps.iter().for_each(|s| s.flatten_into(out)),
            other => out.push(other.clone()),
        }
    }

    fn is_trivial(&self) -> bool {
        match self {
            OperatorKind::AmplitudeScale { coords, factor } => coords.is_empty() || *factor == 1.0,
            OperatorKind::Offset { offsets } => offsets.values().all(|v| *v == 0.0),
            OperatorKind::TimeWarp { samples } => {
                let n = samples.len();
                samples.iter().enumerate().all(|(i, &w)| w == grid_time(i, n))
            }
            OperatorKind::Composite { steps } => steps.iter().all(OperatorKind::is_trivial),
        }
    }
}

/// A curve-space endomorphism `F: X⃗ → X⃗` with a registry label.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialOperator {
    label: String,
    space: SpaceRef,
    kind: OperatorKind,
}

impl PotentialOperator {
    pub fn new(label: impl Into<String>, space: SpaceRef, kind: OperatorKind) -> Result<Self> {
        validate_kind(&space, &kind)?;
        Ok(Self {
            label: label.into(),
            space,
            kind,
        })
    }

    pub fn identity(space: &SpaceRef) -> Self {
        Self {
            label: "identity".into(),
            space: space.clone(),
            kind: OperatorKind::identity(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn is_identity(&self) -> bool {
        self.kind.is_trivial()
    }

    /// Steps in application order with nested composites flattened.
    pub fn steps(&self) -> Vec<OperatorKind> {
        let mut out = Vec::new();
        self.kind.flatten_into(&mut out);
        out
    }

    /// Bound on how much the operator can stretch sup-norm curve distances.
    pub fn lipschitz(&self) -> f64 {
        self.steps()
            .iter()
            .map(|s| match s {
                OperatorKind::AmplitudeScale { factor, .. } => factor.abs().max(1.0),
                _ => 1.0,
            })
            .product()
    }

    /// Applies the operator to one curve of its space.
    pub fn apply_to_curve(&self, c: &Curve) -> Result<Curve> {
        if !same_space(c.space(), &self.space) {
            return Err(Error::space_mismatch(
                self.space.name(),
                c.space().name(),
                format!("operator `{}`", self.label),
            ));
        }
        let mut out = c.clone();
        for step in self.steps() {
            out = apply_step(&self.space, &step, &out);
        }
        Ok(out)
    }

    fn apply_to_point(&self, p: &[f64]) -> Vec<f64> {
        let mut out = p.to_vec();
        for step in self.steps() {
            apply_value_step(&self.space, &step, &mut out);
        }
        out
    }
}

fn validate_kind(space: &SpaceRef, kind: &OperatorKind) -> Result<()> {
    let need = |name: &str| {
        space
            .coordinate(name)
            .map(|_| ())
            .ok_or_else(|| Error::MissingCoordinate(format!("{name}` in space `{}", space.name())))
    };
    match kind {
        OperatorKind::AmplitudeScale { coords, factor } => {
            coords.iter().try_for_each(|c| need(c))?;
            if !factor.is_finite() {
                return Err(Error::InvalidOperator(format!("scale factor {factor} is not finite")));
            }
        }
        OperatorKind::Offset { offsets } => {
            for (c, v) in offsets {
                need(c)?;
                if !v.is_finite() {
                    return Err(Error::InvalidOperator(format!("offset {v} on `{c}` is not finite")));
                }
            }
        }
        OperatorKind::TimeWarp { samples } => {
            let ok = samples.len() >= 2
                && samples[0] == 0.0
                && samples[samples.len() - 1] == 1.0
                && samples.windows(2).all(|w| w[0] < w[1]);
            if !ok {
                return Err(Error::InvalidOperator(
                    "time warp samples must increase strictly from 0 to 1".into(),
                ));
            }
        }
        OperatorKind::Composite { steps } => steps.iter().try_for_each(|s| validate_kind(space, s))?,
    }
    Ok(())
}

/// Piecewise-linear evaluation of warp samples on the uniform grid.
fn warp_eval(samples: &[f64], u: f64) -> f64 {
    let n = samples.len();
    if u.is_nan() || u <= 0.0 {
        return samples[0];
    }
    if u >= 1.0 {
        return samples[n - 1];
    }
    let pos = u * (n - 1) as f64;
    let k = (pos.floor() as usize).min(n - 2);
    let frac = pos - k as f64;
    samples[k] + (samples[k + 1] - samples[k]) * frac
}

fn warp_max_slope(samples: &[f64]) -> f64 {
    let scale = (samples.len() - 1) as f64;
    samples.windows(2).map(|w| (w[1] - w[0]) * scale).fold(0.0, f64::max)
}

fn apply_value_step(space: &SpaceRef, step: &OperatorKind, p: &mut [f64]) {
    match step {
        OperatorKind::AmplitudeScale { coords, factor } => {
            for c in coords {
                let k = space.coordinate(c).expect("validated coordinate");
                p[k] *= factor;
            }
        }
        OperatorKind::Offset { offsets } => {
            for (c, v) in offsets {
                let k = space.coordinate(c).expect("validated coordinate");
                p[k] += v;
            }
        }
        OperatorKind::TimeWarp { .. } | OperatorKind::Composite { .. } => {}
    }
}

fn apply_step(space: &SpaceRef, step: &OperatorKind, c: &Curve) -> Curve {
    let bound = c.continuity().speed_bound();
    let (samples, gain) = match step {
        OperatorKind::TimeWarp { samples: w } => {
            let n = c.len();
            let samples = (0..n).map(|i| c.eval(warp_eval(w, grid_time(i, n)))).collect();
            (samples, warp_max_slope(w))
        }
        OperatorKind::AmplitudeScale { factor, .. } => {
            let samples = c
                .samples()
                .iter()
                .map(|p| {
                    let mut q = p.clone();
                    apply_value_step(space, step, &mut q);
                    q
                })
                .collect();
            (samples, factor.abs().max(1.0))
        }
        _ => {
            let samples = c
                .samples()
                .iter()
                .map(|p| {
                    let mut q = p.clone();
                    apply_value_step(space, step, &mut q);
                    q
                })
                .collect();
            (samples, 1.0)
        }
    };
    let continuity = match (c.continuity(), bound) {
        (Continuity::Continuous { .. }, Some(b)) => Continuity::Continuous {
            speed_bound: Some(b * gain.max(1.0)),
        },
        (other, _) => other,
    };
    Curve::from_parts(space.clone(), samples, continuity)
}

/// `g^F`: every curve transformed by `F`; scales and offsets also move the
/// vertex points, time warps leave them fixed.
pub fn apply_potential(f: &PotentialOperator, g: &Gesture) -> Result<Gesture> {
    if !same_space(g.space(), &f.space) {
        return Err(Error::space_mismatch(
            f.space.name(),
            g.space().name(),
            format!("operator `{}` applied to a gesture", f.label),
        ));
    }
    g.map_parts(g.space().clone(), |p| f.apply_to_point(p), |c| f.apply_to_curve(c))
}

/// Canonical step list: value steps in order (adjacent scales on the same
/// coordinates and adjacent offsets fused), then at most one time warp,
/// trivial steps dropped. Value steps act pointwise and so commute with
/// reparametrization.
fn canonical(steps: Vec<OperatorKind>) -> Vec<OperatorKind> {
    let mut values: Vec<OperatorKind> = Vec::new();
    let mut warp: Option<Vec<f64>> = None;
    for step in steps {
        match step {
            OperatorKind::TimeWarp { samples } => {
                // c∘w₁ then ∘w₂ is c∘(w₁∘w₂)
                warp = Some(match warp {
                    None => samples,
                    Some(first) => {
                        let n = first.len().max(samples.len());
                        let mut fused: Vec<f64> = (0..n)
                            .map(|i| warp_eval(&first, warp_eval(&samples, grid_time(i, n))))
                            .collect();
                        fused[0] = 0.0;
                        fused[n - 1] = 1.0;
                        fused
                    }
                });
            }
            step => {
                let fused = match (values.last_mut(), &step) {
                    (
                        Some(OperatorKind::AmplitudeScale { coords: a, factor: fa }),
                        OperatorKind::AmplitudeScale { coords: b, factor: fb },
                    ) if a == b => {
                        *fa *= fb;
                        true
                    }
                    (Some(OperatorKind::Offset { offsets: a }), OperatorKind::Offset { offsets: b }) => {
                        for (c, v) in b {
                            *a.entry(c.clone()).or_insert(0.0) += v;
                        }
                        true
                    }
                    _ => false,
                };
                if !fused {
                    values.push(step);
                }
            }
        }
    }
    values.retain(|s| !s.is_trivial());
    if let Some(samples) = warp {
        let w = OperatorKind::TimeWarp { samples };
        if !w.is_trivial() {
            values.push(w);
        }
    }
    values
}

fn from_steps(steps: Vec<OperatorKind>) -> OperatorKind {
    if steps.len() == 1 {
        steps.into_iter().next().expect("one step")
    } else {
        OperatorKind::Composite { steps }
    }
}

/// The vertical composite `PF ∘ P`: apply `p`, then `pf`.
pub fn compose_vertical(p: &PotentialOperator, pf: &PotentialOperator) -> Result<PotentialOperator> {
    if !same_space(&p.space, &pf.space) {
        return Err(Error::space_mismatch(p.space.name(), pf.space.name(), "vertical composition"));
    }
    let mut steps = p.steps();
    steps.extend(pf.steps());
    Ok(PotentialOperator {
        label: format!("{}∘{}", pf.label, p.label),
        space: p.space.clone(),
        kind: from_steps(canonical(steps)),
    })
}

/// Linear path `V(λ)` from the identity (`λ = 0`) to a target operator (`λ = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPath {
    target: PotentialOperator,
}

impl PotentialPath {
    pub fn new(target: PotentialOperator) -> Self {
        Self { target }
    }

    pub fn target(&self) -> &PotentialOperator {
        &self.target
    }

    pub fn at(&self, lambda: f64) -> PotentialOperator {
        if lambda.is_nan() || lambda <= 0.0 {
            return PotentialOperator::identity(&self.target.space);
        }
        if lambda >= 1.0 {
            return self.target.clone();
        }
        PotentialOperator {
            label: format!("{}@{lambda}", self.target.label),
            space: self.target.space.clone(),
            kind: scale_kind(&self.target.kind, lambda),
        }
    }

    /// The homotopy `λ ↦ V(λ)(g)` sampled at `frames` parameters.
    pub fn family(&self, g: &Gesture, frames: usize) -> Result<HomotopyFamily> {
        let frames = frames.max(2);
        let members = (0..frames)
            .map(|i| apply_potential(&self.at(grid_time(i, frames)), g))
            .collect::<Result<Vec<_>>>()?;
        HomotopyFamily::keyframes(members)
    }
}

fn scale_kind(kind: &OperatorKind, lambda: f64) -> OperatorKind {
    match kind {
        OperatorKind::AmplitudeScale { coords, factor } => OperatorKind::AmplitudeScale {
            coords: coords.clone(),
            factor: 1.0 + lambda * (factor - 1.0),
        },
        OperatorKind::Offset { offsets } => OperatorKind::Offset {
            offsets: offsets.iter().map(|(c, v)| (c.clone(), lambda * v)).collect(),
        },
        OperatorKind::TimeWarp { samples } => {
            let n = samples.len();
            let mut mixed: Vec<f64> = samples
                .iter()
                .enumerate()
                .map(|(i, w)| (1.0 - lambda) * grid_time(i, n) + lambda * w)
                .collect();
            mixed[0] = 0.0;
            mixed[n - 1] = 1.0;
            OperatorKind::TimeWarp { samples: mixed }
        }
        OperatorKind::Composite { steps } => OperatorKind::Composite {
            steps: steps.iter().map(|s| scale_kind(s, lambda)).collect(),
        },
    }
}

/// Residual of one commuting square over the probe set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareReport {
    pub residual: f64,
    pub tolerance: f64,
    pub commutes: bool,
    pub probes: usize,
}

impl SquareReport {
    fn new(residual: f64, tolerance: f64, probes: usize) -> Self {
        Self {
            residual,
            tolerance,
            commutes: residual <= tolerance,
            probes,
        }
    }
}

fn check_map(m: &SpaceMap, fx: &PotentialOperator, fy: &PotentialOperator) -> Result<()> {
    if !same_space(m.source(), &fx.space) {
        return Err(Error::space_mismatch(
            fx.space.name(),
            m.source().name(),
            format!("source of the map crossing operator `{}`", fx.label),
        ));
    }
    if !same_space(m.target(), &fy.space) {
        return Err(Error::space_mismatch(
            fy.space.name(),
            m.target().name(),
            format!("target of the map crossing operator `{}`", fy.label),
        ));
    }
    Ok(())
}

/// `max_c d(ṁ(F_X c), F_Y(ṁ c))` over the probe curves of `X`.
pub fn compose_horizontal(
    fx: &PotentialOperator,
    m: &SpaceMap,
    fy: &PotentialOperator,
    opts: &CheckOptions,
) -> Result<SquareReport> {
    check_map(m, fx, fy)?;
    let probes = probe_curves(&fx.space, opts.seed_label());
    let residual = square_residual(fx, m, fy, &probes, opts.grid)?;
    Ok(SquareReport::new(residual, opts.tolerance, probes.len()))
}

fn square_residual(
    fx: &PotentialOperator,
    m: &SpaceMap,
    fy: &PotentialOperator,
    curves: &[Curve],
    grid: usize,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for c in curves {
        let across = apply_spacemap_to_curve(m, &fx.apply_to_curve(c)?)?;
        let down = fy.apply_to_curve(&apply_spacemap_to_curve(m, c)?)?;
        worst = worst.max(curve_distance_on(&across, &down, grid)?);
    }
    Ok(worst)
}

/// Both orders of pasting two stacked squares, compared on the probe set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterchangeReport {
    /// `max_c d(ṁ(F₂F₁ c), G₂G₁(ṁ c))`.
    pub residual: f64,
    /// `max_c d(ṁ(F₂F₁ c), G₂(ṁ(F₁ c)))`: the route through the middle.
    pub mixed_route_residual: f64,
    pub lower_square: f64,
    /// The upper square, measured on the images `F₁ c`.
    pub upper_square: f64,
    /// `upper + L(G₂)·lower`, an upper bound for `residual`.
    pub pasting_bound: f64,
    pub tolerance: f64,
    pub commutes: bool,
}

/// Compares the vertical-then-horizontal composite `ṁ∘(F₂∘F₁)` with the
/// horizontal-then-vertical one `(G₂∘G₁)∘ṁ`.
pub fn interchange_check(
    f1: &PotentialOperator,
    f2: &PotentialOperator,
    g1: &PotentialOperator,
    g2: &PotentialOperator,
    m: &SpaceMap,
    opts: &CheckOptions,
) -> Result<InterchangeReport> {
    check_map(m, f1, g1)?;
    check_map(m, f2, g2)?;
    let probes = probe_curves(&f1.space, opts.seed_label());
    let lifted = probes
        .iter()
        .map(|c| f1.apply_to_curve(c))
        .collect::<Result<Vec<_>>>()?;
    let lower_square = square_residual(f1, m, g1, &probes, opts.grid)?;
    let upper_square = square_residual(f2, m, g2, &lifted, opts.grid)?;
    let mut residual: f64 = 0.0;
    let mut mixed: f64 = 0.0;
    for (c, f1c) in probes.iter().zip(&lifted) {
        let vertical_first = apply_spacemap_to_curve(m, &f2.apply_to_curve(f1c)?)?;
        let horizontal_first = g2.apply_to_curve(&g1.apply_to_curve(&apply_spacemap_to_curve(m, c)?)?)?;
        let middle = g2.apply_to_curve(&apply_spacemap_to_curve(m, f1c)?)?;
        residual = residual.max(curve_distance_on(&vertical_first, &horizontal_first, opts.grid)?);
        mixed = mixed.max(curve_distance_on(&vertical_first, &middle, opts.grid)?);
    }
    Ok(InterchangeReport {
        residual,
        mixed_route_residual: mixed,
        lower_square,
        upper_square,
        pasting_bound: upper_square + g2.lipschitz() * lower_square,
        tolerance: opts.tolerance,
        commutes: residual <= opts.tolerance,
    })
}

/// `w(t) = t + s·t(1−t)` on [`WARP_SAMPLES`] nodes.
pub fn attack_warp(strength: f64) -> OperatorKind {
    let samples = (0..WARP_SAMPLES)
        .map(|i| {
            let t = grid_time(i, WARP_SAMPLES);
            t + strength * t * (1.0 - t)
        })
        .collect();
    OperatorKind::TimeWarp { samples }
}

fn scale(coord: &str, factor: f64) -> OperatorKind {
    OperatorKind::AmplitudeScale {
        coords: vec![coord.to_string()],
        factor,
    }
}

/// Loudness up by [`FORTE_GAIN`] with a quicker attack.
pub fn forte_on(space: &SpaceRef, coord: &str) -> Result<PotentialOperator> {
    PotentialOperator::new(
        "forte",
        space.clone(),
        OperatorKind::Composite {
            steps: vec![scale(coord, FORTE_GAIN), attack_warp(ATTACK_WARP)],
        },
    )
}

/// Loudness down to [`PIANO_GAIN`].
pub fn piano_on(space: &SpaceRef, coord: &str) -> Result<PotentialOperator> {
    PotentialOperator::new("piano", space.clone(), scale(coord, PIANO_GAIN))
}

/// The operator taking piano to forte: `forte = crescendo ∘ piano`.
pub fn crescendo_on(space: &SpaceRef, coord: &str) -> Result<PotentialOperator> {
    PotentialOperator::new(
        "crescendo",
        space.clone(),
        OperatorKind::Composite {
            steps: vec![scale(coord, FORTE_GAIN / PIANO_GAIN), attack_warp(ATTACK_WARP)],
        },
    )
}

pub fn forte(space: &SpaceRef) -> Result<PotentialOperator> {
    forte_on(space, "loudness")
}

pub fn piano(space: &SpaceRef) -> Result<PotentialOperator> {
    piano_on(space, "loudness")
}

pub fn crescendo(space: &SpaceRef) -> Result<PotentialOperator> {
    crescendo_on(space, "loudness")
}
