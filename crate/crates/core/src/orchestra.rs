//! Finite diagrams of gestures, cocones (the conductor) and cones (the
//! listener), verified numerically.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::check::CheckOptions;
use crate::curvespace::{apply_spacemap_to_curve, curve_distance_on, probe_curves, same_space, SpaceMap};
use crate::error::{Error, Result};
use crate::gesture::{apply_spacemap_to_gesture, check_morphism_on, gesture_distance_on, Gesture, GestureMorphism};
use crate::potential::{PotentialOperator, SquareReport};
use crate::skeleton::{enumerate_digraph_morphisms, DigraphMorphism, ENUMERATION_GUARD};

/// Wording attached to every universal-property verdict.
pub const UNIQUENESS_SCOPE: &str = "uniqueness among supplied candidates";

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramEdge {
    pub source: String,
    pub target: String,
    pub morphism: GestureMorphism,
}

/// Nodes carry gestures, edges carry gesture morphisms between them.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureDiagram {
    nodes: BTreeMap<String, Gesture>,
    edges: BTreeMap<String, DiagramEdge>,
    opposite: bool,
}

impl GestureDiagram {
    /// Rejects dangling edges and edges whose square does not commute.
    pub fn new(nodes: BTreeMap<String, Gesture>, edges: BTreeMap<String, DiagramEdge>, opts: &CheckOptions) -> Result<Self> {
        for (id, e) in &edges {
            let src = nodes.get(&e.source).ok_or_else(|| Error::UnknownNode(e.source.clone()))?;
            let tgt = nodes.get(&e.target).ok_or_else(|| Error::UnknownNode(e.target.clone()))?;
            let report = check_morphism_on(&e.morphism, src, tgt, opts.grid).map_err(|err| in_edge(id, err))?;
            if !report.commutes {
                return Err(Error::EdgeDoesNotCommute {
                    edge: id.clone(),
                    residual: report.residual,
                    tolerance: report.tolerance,
                });
            }
        }
        Ok(Self {
            nodes,
            edges,
            opposite: false,
        })
    }

    pub fn nodes(&self) -> &BTreeMap<String, Gesture> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<String, DiagramEdge> {
        &self.edges
    }

    pub fn is_opposite(&self) -> bool {
        self.opposite
    }

    /// The same data read in the opposite category: every edge reversed,
    /// composition read backwards.
    pub fn opposite(&self) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|(id, e)| {
                let flipped = DiagramEdge {
                    source: e.target.clone(),
                    target: e.source.clone(),
                    morphism: e.morphism.clone(),
                };
                (id.clone(), flipped)
            })
            .collect();
        Self {
            nodes: self.nodes.clone(),
            edges,
            opposite: !self.opposite,
        }
    }
}

fn in_edge(edge: &str, err: Error) -> Error {
    match err {
        Error::SpaceMismatch { expected, found, context } => Error::SpaceMismatch {
            expected,
            found,
            context: format!("{context} on edge `{edge}`"),
        },
        Error::StructuralMismatch(msg) => Error::StructuralMismatch(format!("edge `{edge}`: {msg}")),
        other => other,
    }
}

/// Legs from every node into the apex.
#[derive(Debug, Clone, PartialEq)]
pub struct Cocone {
    pub apex: Gesture,
    pub legs: BTreeMap<String, GestureMorphism>,
}

/// Legs from the apex to every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    pub apex: Gesture,
    pub legs: BTreeMap<String, GestureMorphism>,
}

impl Cocone {
    /// The same legs seen as a cone over the opposite diagram.
    pub fn opposite(&self) -> Cone {
        Cone {
            apex: self.apex.clone(),
            legs: self.legs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport {
    /// Largest edge-commutativity residual.
    pub residual: f64,
    pub per_edge: BTreeMap<String, f64>,
    /// Residual of each leg as a gesture morphism.
    pub per_leg: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub valid: bool,
}

/// Sup distance between two parallel morphisms, on a gesture and on the
/// probe curves of their common source space.
fn parallel_gap(a: &GestureMorphism, b: &GestureMorphism, at: &Gesture, opts: &CheckOptions) -> Result<f64> {
    if a.skeleton_map() != b.skeleton_map() {
        return Err(Error::StructuralMismatch("parallel morphisms differ on skeleta".into()));
    }
    let (ma, mb) = (a.space_map(), b.space_map());
    let mut gap = gesture_distance_on(&apply_spacemap_to_gesture(ma, at)?, &apply_spacemap_to_gesture(mb, at)?, opts.grid)?;
    for c in probe_curves(ma.source(), opts.seed_label()) {
        let d = curve_distance_on(&apply_spacemap_to_curve(ma, &c)?, &apply_spacemap_to_curve(mb, &c)?, opts.grid)?;
        gap = gap.max(d);
    }
    Ok(gap)
}

fn leg<'a>(legs: &'a BTreeMap<String, GestureMorphism>, node: &str) -> Result<&'a GestureMorphism> {
    legs.get(node).ok_or_else(|| Error::MissingLeg(node.to_string()))
}

/// Legs point into the apex when `inward`; composition is read in the
/// concrete direction either way.
fn leg_residuals(
    d: &GestureDiagram,
    apex: &Gesture,
    legs: &BTreeMap<String, GestureMorphism>,
    inward: bool,
    opts: &CheckOptions,
) -> Result<ConeReport> {
    for node in d.nodes.keys() {
        leg(legs, node)?;
    }
    let mut per_edge = BTreeMap::new();
    for (id, e) in &d.edges {
        // concrete source and target of the edge's morphism
        let (src, tgt) = if d.opposite {
            (&e.target, &e.source)
        } else {
            (&e.source, &e.target)
        };
        let gap = if inward {
            let composite = e.morphism.then(leg(legs, tgt)?).map_err(|err| in_edge(id, err))?;
            parallel_gap(&composite, leg(legs, src)?, &d.nodes[src], opts)
        } else {
            let composite = leg(legs, src)?.then(&e.morphism).map_err(|err| in_edge(id, err))?;
            parallel_gap(&composite, leg(legs, tgt)?, apex, opts)
        }
        .map_err(|err| in_edge(id, err))?;
        per_edge.insert(id.clone(), gap);
    }
    let mut per_leg = BTreeMap::new();
    for (node, g) in &d.nodes {
        let l = leg(legs, node)?;
        let r = if inward {
            check_morphism_on(l, g, apex, opts.grid)?
        } else {
            check_morphism_on(l, apex, g, opts.grid)?
        };
        per_leg.insert(node.clone(), r.residual);
    }
    let residual = per_edge.values().copied().fold(0.0, f64::max);
    let worst_leg = per_leg.values().copied().fold(0.0, f64::max);
    Ok(ConeReport {
        residual,
        per_edge,
        per_leg,
        tolerance: opts.tolerance,
        valid: residual <= opts.tolerance && worst_leg <= opts.tolerance,
    })
}

/// For every edge `e: i → j`, compares `leg_j ∘ e` with `leg_i`.
pub fn verify_cocone(d: &GestureDiagram, c: &Cocone, opts: &CheckOptions) -> Result<ConeReport> {
    leg_residuals(d, &c.apex, &c.legs, !d.opposite, opts)
}

/// For every edge `e: i → j`, compares `e ∘ leg_i` with `leg_j`.
pub fn verify_cone(d: &GestureDiagram, c: &Cone, opts: &CheckOptions) -> Result<ConeReport> {
    leg_residuals(d, &c.apex, &c.legs, d.opposite, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversalReport {
    /// Worst leg mismatch `d(u ∘ leg, rival leg)` per candidate, in input order.
    pub candidate_residuals: Vec<f64>,
    /// Candidate's own commuting-square residual from apex to rival apex.
    pub candidate_morphism_residuals: Vec<f64>,
    pub mediators: Vec<usize>,
    pub existence: bool,
    pub unique: bool,
    /// Skeleton maps between the apexes compatible with every leg, when
    /// enumeration stays within the guard.
    pub skeleton_mediators: Option<usize>,
    pub scope: String,
}

/// Which supplied candidates `u: apex → rival apex` satisfy
/// `u ∘ leg_i = rival_i` for every node.
pub fn verify_universal_property(
    d: &GestureDiagram,
    c: &Cocone,
    rival: &Cocone,
    candidates: &[GestureMorphism],
    opts: &CheckOptions,
) -> Result<UniversalReport> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let rival_report = verify_cocone(d, rival, opts)?;
    if !rival_report.valid {
        let worst_leg = rival_report.per_leg.values().copied().fold(0.0, f64::max);
        return Err(Error::InvalidRival(rival_report.residual.max(worst_leg)));
    }
    let mut candidate_residuals = Vec::with_capacity(candidates.len());
    let mut candidate_morphism_residuals = Vec::with_capacity(candidates.len());
    let mut mediators = Vec::new();
    for (k, u) in candidates.iter().enumerate() {
        let own = check_morphism_on(u, &c.apex, &rival.apex, opts.grid)?.residual;
        let mut worst: f64 = 0.0;
        for (node, g) in &d.nodes {
            let composite = leg(&c.legs, node)?.then(u)?;
            let target = leg(&rival.legs, node)?;
            if composite.skeleton_map() != target.skeleton_map() {
                worst = f64::MAX;
                break;
            }
            worst = worst.max(parallel_gap(&composite, target, g, opts)?);
        }
        if worst <= opts.tolerance && own <= opts.tolerance {
            mediators.push(k);
        }
        candidate_residuals.push(worst);
        candidate_morphism_residuals.push(own);
    }
    let skeleton_mediators = skeleton_mediator_count(d, c, rival)?;
    Ok(UniversalReport {
        candidate_residuals,
        candidate_morphism_residuals,
        existence: !mediators.is_empty(),
        unique: mediators.len() == 1,
        mediators,
        skeleton_mediators,
        scope: UNIQUENESS_SCOPE.into(),
    })
}

fn skeleton_mediator_count(d: &GestureDiagram, c: &Cocone, rival: &Cocone) -> Result<Option<usize>> {
    let (src, dst) = (c.apex.skeleton(), rival.apex.skeleton());
    let within = |g: &crate::skeleton::Digraph| g.vertex_count() <= ENUMERATION_GUARD && g.arrow_count() <= ENUMERATION_GUARD;
    if !within(src) || !within(dst) {
        return Ok(None);
    }
    let count = enumerate_digraph_morphisms(src, dst)?
        .into_iter()
        .filter(|t| {
            d.nodes.keys().all(|node| {
                let composed: Option<DigraphMorphism> = c.legs[node].skeleton_map().then(t).ok();
                composed.as_ref() == Some(rival.legs[node].skeleton_map())
            })
        })
        .count();
    Ok(Some(count))
}

/// `max_c d(F_C(ṁ₀ c), ṁ_F(F_inst c))` over the instrument's probe curves.
pub fn verify_conductor_squares(
    f_inst: &PotentialOperator,
    f_conductor: &PotentialOperator,
    m0: &SpaceMap,
    m_f: &SpaceMap,
    opts: &CheckOptions,
) -> Result<SquareReport> {
    if !same_space(m0.source(), m_f.source()) || !same_space(m0.target(), m_f.target()) {
        return Err(Error::space_mismatch(
            m0.source().name(),
            m_f.source().name(),
            "conductor square maps must share source and target",
        ));
    }
    for (op, space, role) in [(f_inst, m0.source(), "instrument"), (f_conductor, m0.target(), "conductor")] {
        if !same_space(op.space(), space) {
            return Err(Error::space_mismatch(
                space.name(),
                op.space().name(),
                format!("{role} operator `{}`", op.label()),
            ));
        }
    }
    let probes = probe_curves(m0.source(), opts.seed_label());
    let mut residual: f64 = 0.0;
    for c in &probes {
        let down_then_across = f_conductor.apply_to_curve(&apply_spacemap_to_curve(m0, c)?)?;
        let across_then_down = apply_spacemap_to_curve(m_f, &f_inst.apply_to_curve(c)?)?;
        residual = residual.max(curve_distance_on(&down_then_across, &across_then_down, opts.grid)?);
    }
    Ok(SquareReport {
        residual,
        tolerance: opts.tolerance,
        commutes: residual <= opts.tolerance,
        probes: probes.len(),
    })
}

/// One performer: the gesture played, the dynamics applied, the map into
/// the conductor's space and the map from the listener's space.
#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentPart {
    pub name: String,
    pub gesture: Gesture,
    pub operator: PotentialOperator,
    pub conductor_leg: SpaceMap,
    pub listener_leg: SpaceMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub id: String,
    pub source: String,
    pub target: String,
    pub map: SpaceMap,
}

/// A gesture `Z` the conductor must map into uniquely.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTarget {
    pub gesture: Gesture,
    pub legs: BTreeMap<String, SpaceMap>,
    pub candidates: Vec<SpaceMap>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrchestraConfig {
    pub instruments: Vec<InstrumentPart>,
    pub edges: Vec<EdgeSpec>,
    pub conductor: Gesture,
    pub conductor_operator: PotentialOperator,
    pub listener: Gesture,
    pub stage: Option<StageTarget>,
    pub tolerance: f64,
    /// Also build the conductor-as-source reading.
    pub reversed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrchestraScenario {
    pub diagram: GestureDiagram,
    pub conductor: Cocone,
    pub listener: Cone,
    pub operators: BTreeMap<String, PotentialOperator>,
    pub conductor_operator: PotentialOperator,
    pub stage: Option<(Cocone, Vec<GestureMorphism>)>,
    /// Conductor-to-instrument legs (pseudo-inverses of the injections).
    pub reversed: Option<Cone>,
    pub tolerance: f64,
}

fn skeleton_map(from: &Gesture, to: &Gesture, what: &str) -> Result<DigraphMorphism> {
    if from.skeleton() != to.skeleton() {
        return Err(Error::ConfigInvalid(format!("{what}: skeleta differ")));
    }
    Ok(DigraphMorphism::identity(from.skeleton()))
}

fn morphism(from: &Gesture, to: &Gesture, map: &SpaceMap, tolerance: f64, what: &str) -> Result<GestureMorphism> {
    if !same_space(map.source(), from.space()) || !same_space(map.target(), to.space()) {
        return Err(Error::space_mismatch(
            &format!("{} → {}", from.space().name(), to.space().name()),
            &format!("{} → {}", map.source().name(), map.target().name()),
            what,
        ));
    }
    GestureMorphism::new(skeleton_map(from, to, what)?, map.clone(), tolerance)
}

/// Builds the instrument diagram with the conductor cocone, the listener
/// cone and, when configured, the stage target and reversed reading.
pub fn build_orchestra_scenario(config: &OrchestraConfig, opts: &CheckOptions) -> Result<OrchestraScenario> {
    if config.instruments.is_empty() {
        return Err(Error::ConfigInvalid("scenario lists no instruments".into()));
    }
    let eta = config.tolerance;
    let mut nodes = BTreeMap::new();
    let mut operators = BTreeMap::new();
    for part in &config.instruments {
        if nodes.insert(part.name.clone(), part.gesture.clone()).is_some() {
            return Err(Error::ConfigInvalid(format!("instrument `{}` listed twice", part.name)));
        }
        if !same_space(part.operator.space(), part.gesture.space()) {
            return Err(Error::space_mismatch(
                part.gesture.space().name(),
                part.operator.space().name(),
                format!("operator `{}` on edge `{}→conductor`", part.operator.label(), part.name),
            ));
        }
        operators.insert(part.name.clone(), part.operator.clone());
    }
    if !same_space(config.conductor_operator.space(), config.conductor.space()) {
        return Err(Error::space_mismatch(
            config.conductor.space().name(),
            config.conductor_operator.space().name(),
            format!("conductor operator `{}`", config.conductor_operator.label()),
        ));
    }
    let mut edges = BTreeMap::new();
    for e in &config.edges {
        let src = nodes.get(&e.source).ok_or_else(|| Error::ConfigInvalid(format!("edge `{}` starts at unknown node `{}`", e.id, e.source)))?;
        let tgt = nodes.get(&e.target).ok_or_else(|| Error::ConfigInvalid(format!("edge `{}` ends at unknown node `{}`", e.id, e.target)))?;
        let m = morphism(src, tgt, &e.map, eta, &format!("edge `{}`", e.id))?;
        let edge = DiagramEdge {
            source: e.source.clone(),
            target: e.target.clone(),
            morphism: m,
        };
        if edges.insert(e.id.clone(), edge).is_some() {
            return Err(Error::ConfigInvalid(format!("edge `{}` listed twice", e.id)));
        }
    }
    let diagram_opts = CheckOptions {
        tolerance: eta,
        ..opts.clone()
    };
    let diagram = GestureDiagram::new(nodes, edges, &diagram_opts)?;
    let mut cocone_legs = BTreeMap::new();
    let mut cone_legs = BTreeMap::new();
    for part in &config.instruments {
        let into = morphism(&part.gesture, &config.conductor, &part.conductor_leg, eta, &format!("edge `{}→conductor`", part.name))?;
        let out = morphism(&config.listener, &part.gesture, &part.listener_leg, eta, &format!("edge `listener→{}`", part.name))?;
        cocone_legs.insert(part.name.clone(), into);
        cone_legs.insert(part.name.clone(), out);
    }
    let stage = match &config.stage {
        None => None,
        Some(target) => {
            let mut legs = BTreeMap::new();
            for part in &config.instruments {
                let map = target
                    .legs
                    .get(&part.name)
                    .ok_or_else(|| Error::MissingLeg(part.name.clone()))?;
                legs.insert(
                    part.name.clone(),
                    morphism(&part.gesture, &target.gesture, map, eta, &format!("edge `{}→stage`", part.name))?,
                );
            }
            let candidates = target
                .candidates
                .iter()
                .enumerate()
                .map(|(k, m)| morphism(&config.conductor, &target.gesture, m, eta, &format!("stage candidate {k}")))
                .collect::<Result<Vec<_>>>()?;
            Some((
                Cocone {
                    apex: target.gesture.clone(),
                    legs,
                },
                candidates,
            ))
        }
    };
    let reversed = if config.reversed {
        let mut legs = BTreeMap::new();
        for (name, l) in &cocone_legs {
            let back = l.space_map().pseudo_inverse()?;
            legs.insert(
                name.clone(),
                morphism(&config.conductor, &diagram.nodes()[name], &back, eta, &format!("edge `conductor→{name}`"))?,
            );
        }
        Some(Cone {
            apex: config.conductor.clone(),
            legs,
        })
    } else {
        None
    };
    Ok(OrchestraScenario {
        diagram,
        conductor: Cocone {
            apex: config.conductor.clone(),
            legs: cocone_legs,
        },
        listener: Cone {
            apex: config.listener.clone(),
            legs: cone_legs,
        },
        operators,
        conductor_operator: config.conductor_operator.clone(),
        stage,
        reversed,
        tolerance: eta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrchestraReport {
    pub cocone: ConeReport,
    pub cone: ConeReport,
    /// The cocone re-checked as a cone over the opposite diagram.
    pub dual_cone: ConeReport,
    pub conductor_squares: BTreeMap<String, SquareReport>,
    pub universal: Option<UniversalReport>,
    /// Conductor-as-source reading, reported alongside; never gates `passed`.
    pub reversed_reading: Option<ConeReport>,
    pub passed: bool,
}

/// Runs every check of a built scenario.
pub fn verify_orchestra(s: &OrchestraScenario, opts: &CheckOptions) -> Result<OrchestraReport> {
    let opts = CheckOptions {
        tolerance: s.tolerance,
        ..opts.clone()
    };
    let cocone = verify_cocone(&s.diagram, &s.conductor, &opts)?;
    let cone = verify_cone(&s.diagram, &s.listener, &opts)?;
    let dual_cone = verify_cone(&s.diagram.opposite(), &s.conductor.opposite(), &opts)?;
    let mut conductor_squares = BTreeMap::new();
    for (name, op) in &s.operators {
        let m = s.conductor.legs[name].space_map();
        let square = verify_conductor_squares(op, &s.conductor_operator, m, m, &opts)
            .map_err(|err| in_edge(&format!("{name}→conductor"), err))?;
        conductor_squares.insert(name.clone(), square);
    }
    let universal = match &s.stage {
        Some((rival, candidates)) => Some(verify_universal_property(&s.diagram, &s.conductor, rival, candidates, &opts)?),
        None => None,
    };
    let reversed_reading = match &s.reversed {
        Some(cone) => Some(verify_cone(&s.diagram, cone, &opts)?),
        None => None,
    };
    let passed = cocone.valid
        && cone.valid
        && dual_cone.valid
        && conductor_squares.values().all(|r| r.commutes)
        && universal.as_ref().is_none_or(|u| u.existence && u.unique);
    Ok(OrchestraReport {
        cocone,
        cone,
        dual_cone,
        conductor_squares,
        universal,
        reversed_reading,
        passed,
    })
}
