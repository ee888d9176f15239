use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gesture_core::check::CheckOptions;
use gesture_core::curvespace::{grid_time, SpaceMap, SpaceRef};
use gesture_core::gesture::{
    check_morphism_on, linear_homotopy, performance_smooth, Gesture, GestureMorphism, ValidationReport,
};
use gesture_core::orchestra::{
    build_orchestra_scenario, verify_orchestra, EdgeSpec, InstrumentPart, OrchestraConfig, StageTarget,
};
use gesture_core::similarity::{
    check_similarity, conjecture_check, ConjectureReport, Generator, SimilarityQuery, SimilarityReport,
    SynthesisMapping, DEFAULT_R0,
};
use gesture_core::skeleton::enumerate_digraph_morphisms;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::format::{
    read_gesture, read_gesture_unchecked, read_json, read_morphism, read_operators, resolve, to_json, write_file,
    write_gesture, MapSpec, SCHEMA_VERSION,
};

pub const DEFAULT_ETA: f64 = 1e-2;

/// Exit code and standard output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

impl Outcome {
    pub fn new(code: i32, stdout: String) -> Self {
        Self { code, stdout }
    }
}

/// Flags shared by the checking commands.
#[derive(Debug, Clone, PartialEq)]
pub struct Flags {
    pub eta: f64,
    pub r0: f64,
    pub grid: usize,
    pub seed_label: Option<String>,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            eta: DEFAULT_ETA,
            r0: DEFAULT_R0,
            grid: CheckOptions::default().grid,
            seed_label: None,
        }
    }
}

impl Flags {
    pub fn options(&self) -> CheckOptions {
        CheckOptions {
            tolerance: self.eta,
            grid: self.grid,
            seed_label: self.seed_label.clone(),
        }
    }
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    schema_version: u32,
    path: String,
    valid: bool,
    #[serde(flatten)]
    report: &'a ValidationReport,
}

pub fn validate(path: &Path) -> Result<Outcome, CliError> {
    let g = read_gesture_unchecked(path)?;
    let report = g.validate();
    let out = ValidateOutput {
        schema_version: SCHEMA_VERSION,
        path: path.display().to_string(),
        valid: report.is_valid(),
        report: &report,
    };
    Ok(Outcome::new(if report.is_valid() { 0 } else { 1 }, to_json(&out)))
}

/// The digraph morphism under which `m` carries `g` closest to `h`; ties go
/// to the first in enumeration order.
pub fn best_morphism(g: &Gesture, h: &Gesture, m: &SpaceMap, flags: &Flags) -> Result<GestureMorphism, CliError> {
    let mut best: Option<(f64, GestureMorphism)> = None;
    for t in enumerate_digraph_morphisms(g.skeleton(), h.skeleton())? {
        let gm = GestureMorphism::new(t, m.clone(), flags.eta)?;
        let r = check_morphism_on(&gm, g, h, flags.grid)?.residual;
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, gm));
        }
    }
    best.map(|(_, gm)| gm).ok_or_else(|| {
        CliError::Domain(gesture_core::Error::StructuralMismatch(
            "no digraph morphism between the two skeletons".into(),
        ))
    })
}

fn expect_space(role: &str, expected: &str, g: &Gesture) -> Result<(), CliError> {
    if g.space().name() == expected {
        Ok(())
    } else {
        Err(CliError::Domain(gesture_core::Error::SpaceMismatch {
            expected: expected.to_string(),
            found: g.space().name().to_string(),
            context: format!(" ({role} of the morphism file)"),
        }))
    }
}

fn known_spaces<'a>(gestures: impl IntoIterator<Item = &'a Gesture>) -> BTreeMap<String, SpaceRef> {
    gestures
        .into_iter()
        .map(|g| (g.space().name().to_string(), g.space().clone()))
        .collect()
}

fn split_pair(text: &str, what: &str) -> Result<(String, String), CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [one] if !one.is_empty() => Ok((one.to_string(), one.to_string())),
        [a, b] if !a.is_empty() && !b.is_empty() => Ok((a.to_string(), b.to_string())),
        _ => Err(CliError::Input(format!("{what} must be `x` or `x,y`, got `{text}`"))),
    }
}

/// Default synthesis: the `loudness` coordinate when both spaces carry it.
fn synthesis_for(amplitude: Option<&str>, g: &Gesture, h: &Gesture) -> Option<(SynthesisMapping, SynthesisMapping)> {
    let name = amplitude.unwrap_or("loudness");
    (g.space().coordinate(name).is_some() && h.space().coordinate(name).is_some())
        .then(|| (SynthesisMapping::new(name), SynthesisMapping::new(name)))
}

#[derive(Debug, Clone, Default)]
pub struct SimilarityArgs {
    pub g: PathBuf,
    pub h: PathBuf,
    pub morphism: Option<PathBuf>,
    pub generators: Option<String>,
    pub operators: Option<PathBuf>,
    pub bases: Option<String>,
    pub amplitude: Option<String>,
}

pub fn similarity(args: &SimilarityArgs, flags: &Flags) -> Result<Outcome, CliError> {
    let g = read_gesture(&args.g)?;
    let h = read_gesture(&args.h)?;
    let morphism = match &args.morphism {
        Some(path) => {
            let file = read_morphism(path)?;
            expect_space("source", &file.source_space, &g)?;
            expect_space("target", &file.target_space, &h)?;
            let m = file.map.build(g.space(), h.space())?;
            match &file.skeleton_map {
                Some(t) => GestureMorphism::new(t.build(g.skeleton(), h.skeleton())?, m, flags.eta)?,
                None => best_morphism(&g, &h, &m, flags)?,
            }
        }
        None if g.space() == h.space() => best_morphism(&g, &h, &SpaceMap::identity(g.space()), flags)?,
        None => {
            return Err(CliError::Input(format!(
                "gestures live in `{}` and `{}`: pass --morphism",
                g.space().name(),
                h.space().name()
            )))
        }
    };
    let mut query = SimilarityQuery::new(g.clone(), h.clone(), morphism).eta(flags.eta).r0(flags.r0);
    if let Some(labels) = &args.generators {
        let (lg, lh) = split_pair(labels, "--generators")?;
        let registry_path = args
            .operators
            .as_ref()
            .ok_or_else(|| CliError::Input("--generators needs --operators".into()))?;
        let registry = read_operators(registry_path)?;
        let known = known_spaces([&g, &h]);
        let mut fg = Generator::new(registry.instantiate(&lg, g.space(), &known)?);
        let mut fh = Generator::new(registry.instantiate(&lh, h.space(), &known)?);
        if let Some(bases) = &args.bases {
            let (bg, bh) = split_pair(bases, "--bases")?;
            fg = fg.with_base(read_gesture(Path::new(&bg))?);
            fh = fh.with_base(read_gesture(Path::new(&bh))?);
        }
        query = query.generators(fg, fh);
        if let Some((sg, sh)) = synthesis_for(args.amplitude.as_deref(), &g, &h) {
            query = query.synthesis(sg, sh);
        }
    }
    let report = check_similarity(&query, &flags.options())?;
    Ok(Outcome::new(if report.similar { 0 } else { 3 }, to_json(&report)))
}

#[derive(Serialize)]
struct HomotopyOutput {
    schema_version: u32,
    steps: usize,
    lambdas: Vec<f64>,
    files: Vec<String>,
    csv: String,
}

/// Writes `family_kkk.json` for `λ_k = k/(n−1)` and one plotting CSV.
pub fn homotopy(a: &Path, b: &Path, steps: usize, out: &Path) -> Result<Outcome, CliError> {
    if steps < 2 {
        return Err(CliError::Input("--steps must be at least 2".into()));
    }
    let g = read_gesture(a)?;
    let h = read_gesture(b)?;
    let family = linear_homotopy(&g, &h)?;
    let mut files = Vec::with_capacity(steps);
    let mut lambdas = Vec::with_capacity(steps);
    let mut csv = String::from("lambda,arrow,sample");
    for d in g.space().dims() {
        csv.push(',');
        csv.push_str(&d.name);
    }
    csv.push('\n');
    for k in 0..steps {
        let lambda = grid_time(k, steps);
        let member = family.at(lambda);
        let path = out.join(format!("family_{k:03}.json"));
        write_gesture(&path, &member)?;
        for (arrow, c) in member.arrow_curves() {
            for (i, p) in c.samples().iter().enumerate() {
                csv.push_str(&format!("{lambda},{arrow},{i}"));
                for x in p {
                    csv.push_str(&format!(",{x}"));
                }
                csv.push('\n');
            }
        }
        files.push(path.display().to_string());
        lambdas.push(lambda);
    }
    let csv_path = out.join("family.csv");
    write_file(&csv_path, &csv)?;
    let summary = HomotopyOutput {
        schema_version: SCHEMA_VERSION,
        steps,
        lambdas,
        files,
        csv: csv_path.display().to_string(),
    };
    Ok(Outcome::new(0, to_json(&summary)))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstrumentSpec {
    pub name: String,
    pub gesture: String,
    pub operator: String,
    pub conductor_leg: MapSpec,
    pub listener_leg: MapSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub id: String,
    pub source: String,
    pub target: String,
    pub map: MapSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApexSpec {
    pub gesture: String,
    #[serde(default)]
    pub operator: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub gesture: String,
    pub legs: BTreeMap<String, MapSpec>,
    pub candidates: Vec<MapSpec>,
}

/// Orchestra scenario document; paths are relative to the file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub operators: String,
    #[serde(default)]
    pub tolerance: Option<f64>,
    pub instruments: Vec<InstrumentSpec>,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
    pub conductor: ApexSpec,
    pub listener: ApexSpec,
    #[serde(default)]
    pub stage: Option<StageSpec>,
    #[serde(default)]
    pub reversed: bool,
}

/// Resolves a scenario file into the library configuration.
pub fn load_scenario(path: &Path, flags: &Flags) -> Result<OrchestraConfig, CliError> {
    let file: ScenarioFile = read_json(path)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::Input(format!("{}: unsupported schema_version", path.display())));
    }
    if file.instruments.is_empty() {
        return Err(CliError::Domain(gesture_core::Error::ConfigInvalid(
            "scenario lists no instruments".into(),
        )));
    }
    let registry = read_operators(&resolve(path, &file.operators))?;
    let load = |p: &str| read_gesture(&resolve(path, p));
    let conductor = load(&file.conductor.gesture)?;
    let listener = load(&file.listener.gesture)?;
    let instruments_g = file
        .instruments
        .iter()
        .map(|i| load(&i.gesture))
        .collect::<Result<Vec<_>, _>>()?;
    let stage_g = file.stage.as_ref().map(|s| load(&s.gesture)).transpose()?;
    let known = known_spaces(
        instruments_g
            .iter()
            .chain([&conductor, &listener])
            .chain(stage_g.iter()),
    );
    let mut instruments = Vec::with_capacity(file.instruments.len());
    for (spec, g) in file.instruments.iter().zip(&instruments_g) {
        instruments.push(InstrumentPart {
            name: spec.name.clone(),
            gesture: g.clone(),
            operator: registry.instantiate(&spec.operator, g.space(), &known)?,
            conductor_leg: spec.conductor_leg.build(g.space(), conductor.space())?,
            listener_leg: spec.listener_leg.build(listener.space(), g.space())?,
        });
    }
    let node_space = |name: &str| -> Result<&SpaceRef, CliError> {
        file.instruments
            .iter()
            .position(|i| i.name == name)
            .map(|k| instruments_g[k].space())
            .ok_or_else(|| CliError::Domain(gesture_core::Error::ConfigInvalid(format!("unknown node `{name}`"))))
    };
    let edges = file
        .edges
        .iter()
        .map(|e| {
            Ok(EdgeSpec {
                id: e.id.clone(),
                source: e.source.clone(),
                target: e.target.clone(),
                map: e.map.build(node_space(&e.source)?, node_space(&e.target)?)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let conductor_label = file
        .conductor
        .operator
        .as_deref()
        .ok_or_else(|| CliError::Domain(gesture_core::Error::ConfigInvalid("conductor needs an operator".into())))?;
    let conductor_operator = registry.instantiate(conductor_label, conductor.space(), &known)?;
    let stage = match (&file.stage, stage_g) {
        (Some(spec), Some(g)) => {
            let mut legs = BTreeMap::new();
            for (name, m) in &spec.legs {
                legs.insert(name.clone(), m.build(node_space(name)?, g.space())?);
            }
            let candidates = spec
                .candidates
                .iter()
                .map(|m| m.build(conductor.space(), g.space()))
                .collect::<Result<Vec<_>, _>>()?;
            Some(StageTarget {
                gesture: g,
                legs,
                candidates,
            })
        }
        _ => None,
    };
    Ok(OrchestraConfig {
        instruments,
        edges,
        conductor,
        conductor_operator,
        listener,
        stage,
        tolerance: file.tolerance.unwrap_or(flags.eta),
        reversed: file.reversed,
    })
}

pub fn orchestra(path: &Path, flags: &Flags) -> Result<Outcome, CliError> {
    let config = load_scenario(path, flags)?;
    let opts = flags.options();
    let scenario = build_orchestra_scenario(&config, &opts)?;
    let report = verify_orchestra(&scenario, &opts)?;
    Ok(Outcome::new(if report.passed { 0 } else { 1 }, to_json(&report)))
}

/// Two gesture changes set side by side: `g0 → g1` and `h0 → h1`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjectureFile {
    pub schema_version: u32,
    pub operators: String,
    pub g0: String,
    pub g1: String,
    pub h0: String,
    pub h1: String,
    /// From the space of `g` to the space of `h`.
    pub map: MapSpec,
    pub generators: (String, String),
    pub amplitude: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjectureOutput {
    pub schema_version: u32,
    pub conjecture: ConjectureReport,
    pub similarity: SimilarityReport,
    /// Similar yet not spectrally similar would contradict the conjecture.
    pub consistent: bool,
}

pub fn conjecture(path: &Path, flags: &Flags) -> Result<Outcome, CliError> {
    let out = conjecture_report(path, flags)?;
    Ok(Outcome::new(0, to_json(&out)))
}

pub fn conjecture_report(path: &Path, flags: &Flags) -> Result<ConjectureOutput, CliError> {
    let file: ConjectureFile = read_json(path)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::Input(format!("{}: unsupported schema_version", path.display())));
    }
    let load = |p: &str| read_gesture(&resolve(path, p));
    let (g0, g1, h0, h1) = (load(&file.g0)?, load(&file.g1)?, load(&file.h0)?, load(&file.h1)?);
    let mapping = SynthesisMapping::new(file.amplitude.clone());
    let conjecture = conjecture_check(&g0, &g1, &h0, &h1, &mapping, &mapping)?;
    let registry = read_operators(&resolve(path, &file.operators))?;
    let known = known_spaces([&g1, &h1]);
    let m = file.map.build(g1.space(), h1.space())?;
    let morphism = best_morphism(&g1, &h1, &m, flags)?;
    let query = SimilarityQuery::new(g1.clone(), h1.clone(), morphism)
        .eta(flags.eta)
        .r0(flags.r0)
        .generators(
            Generator::new(registry.instantiate(&file.generators.0, g1.space(), &known)?).with_base(g0),
            Generator::new(registry.instantiate(&file.generators.1, h1.space(), &known)?).with_base(h0),
        )
        .synthesis(mapping.clone(), mapping);
    let similarity = check_similarity(&query, &flags.options())?;
    let consistent = !similarity.similar || conjecture.spectrally_similar;
    Ok(ConjectureOutput {
        schema_version: SCHEMA_VERSION,
        conjecture,
        similarity,
        consistent,
    })
}

#[derive(Serialize)]
struct PerformOutput {
    schema_version: u32,
    speed_bound: f64,
    passes: usize,
    max_speed: BTreeMap<String, f64>,
    within_bound: bool,
    endpoints_preserved: bool,
    valid: bool,
    output: Option<String>,
}

/// Smooths a symbolic gesture into a physical one.
pub fn perform(path: &Path, speed_bound: f64, passes: usize, out: Option<&Path>) -> Result<Outcome, CliError> {
    let g = read_gesture(path)?;
    let p = performance_smooth(&g, speed_bound, passes)?;
    let max_speed: BTreeMap<String, f64> = p
        .arrow_curves()
        .iter()
        .map(|(a, c)| (a.clone(), c.max_speed()))
        .collect();
    let endpoints_preserved = g.arrow_curves().iter().all(|(a, c)| {
        let q = &p.arrow_curves()[a];
        c.start() == q.start() && c.end() == q.end()
    });
    if let Some(out) = out {
        write_gesture(out, &p)?;
    }
    let within_bound = max_speed.values().all(|&s| s <= speed_bound);
    let report = PerformOutput {
        schema_version: SCHEMA_VERSION,
        speed_bound,
        passes,
        within_bound,
        endpoints_preserved,
        valid: p.validate().is_valid(),
        max_speed,
        output: out.map(|o| o.display().to_string()),
    };
    let ok = report.within_bound && report.endpoints_preserved && report.valid;
    Ok(Outcome::new(if ok { 0 } else { 1 }, to_json(&report)))
}
