//! Generator for the shipped example corpus.
//!
//! Everything derives from one conductor score `S` on a two-phrase chain.
//! Each instrument plays `E(S)` for an affine embedding `E` that copies the
//! beat amplitude into `loudness` and moves its own body coordinate with
//! time only; `P` projects back. Percussion carries a small mallet wobble so
//! that cross-instrument degrees are close to, but not exactly, one.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use gesture_core::curvespace::{grid_time, ConfigSpace, Continuity, Curve, Dimension, SpaceMap, SpaceRef};
use gesture_core::gesture::{apply_spacemap_to_gesture, Flavor, Gesture};
use gesture_core::potential::{apply_potential, crescendo, forte, forte_on, piano, OperatorKind, PotentialOperator, WARP_SAMPLES};
use gesture_core::skeleton::{chain, make_arrow_skeleton};
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::format::{to_json_exact, write_file, write_gesture, MapSpec, OperatorEntry, OperatorsFile, SCHEMA_VERSION};

const PHRASE_SAMPLES: usize = 33;
const NOTE_SAMPLES: usize = 33;
const PERCUSSION_WOBBLE: f64 = 0.002;
const STEP_SAMPLES: usize = 65;

/// Body coordinate of each instrument as `slope·time + intercept`.
const INSTRUMENTS: [(&str, &str, f64, f64); 4] = [
    ("piano", "hand_height", 0.5, 0.2),
    ("percussion", "mallet_height", -0.4, 0.7),
    ("violin", "bow_position", 0.3, 0.1),
    ("flute", "breath", 0.2, 0.4),
];

fn unit(name: &str, unit: &str) -> Dimension {
    Dimension::new(name, unit, 0.0, 1.0)
}

fn space(name: &str, dims: Vec<Dimension>) -> SpaceRef {
    ConfigSpace::new(name, dims).expect("corpus spaces are well formed")
}

pub fn conductor_space() -> SpaceRef {
    space("conductor", vec![unit("time", "s"), unit("beat_amplitude", "")])
}

pub fn listener_space() -> SpaceRef {
    space("listener", vec![unit("time", "s"), unit("perceived_loudness", "")])
}

pub fn stage_space() -> SpaceRef {
    space("stage", vec![unit("time", "s"), unit("hall_level", "")])
}

pub fn instrument_space(name: &str) -> SpaceRef {
    let (_, body, _, _) = INSTRUMENTS.iter().find(|i| i.0 == name).expect("known instrument");
    space(name, vec![unit("time", "s"), unit(body, ""), unit("loudness", "")])
}

fn body_line(name: &str) -> (f64, f64) {
    let (_, _, slope, intercept) = INSTRUMENTS.iter().find(|i| i.0 == name).expect("known instrument");
    (*slope, *intercept)
}

/// `E`: two score coordinates into an instrument.
pub fn embed_spec(instrument: &str) -> MapSpec {
    let (slope, intercept) = body_line(instrument);
    MapSpec::Affine {
        matrix: vec![vec![1.0, 0.0], vec![slope, 0.0], vec![0.0, 1.0]],
        offset: vec![0.0, intercept, 0.0],
    }
}

/// `P`: time and loudness back out of an instrument.
pub fn project_spec() -> MapSpec {
    MapSpec::Affine {
        matrix: vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]],
        offset: vec![0.0, 0.0],
    }
}

/// `E_target ∘ P_source`, written out.
pub fn transfer_spec(target: &str) -> MapSpec {
    let (slope, intercept) = body_line(target);
    MapSpec::Affine {
        matrix: vec![vec![1.0, 0.0, 0.0], vec![slope, 0.0, 0.0], vec![0.0, 0.0, 1.0]],
        offset: vec![0.0, intercept, 0.0],
    }
}

const HALL_GAIN: f64 = 0.8;
const HALL_FLOOR: f64 = 0.1;

fn hall_spec(scale: f64) -> MapSpec {
    MapSpec::Affine {
        matrix: vec![vec![scale, 0.0], vec![0.0, scale * HALL_GAIN]],
        offset: vec![0.0, HALL_FLOOR],
    }
}

fn hall_leg_spec() -> MapSpec {
    MapSpec::Affine {
        matrix: vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, HALL_GAIN]],
        offset: vec![0.0, HALL_FLOOR],
    }
}

fn beat(u: f64) -> f64 {
    0.3 + 0.15 * (2.0 * PI * u).sin().powi(2) + 0.05 * u
}

/// The conductor score `S`, written into `space`.
pub fn score(space: &SpaceRef) -> Gesture {
    let phrase = |from: f64| {
        Curve::from_fn(space.clone(), PHRASE_SAMPLES, Continuity::PiecewiseWithJumps, |t| {
            let u = from + 0.5 * t;
            vec![u, beat(u)]
        })
        .expect("score samples are finite")
    };
    let curves = BTreeMap::from([("a0".to_string(), phrase(0.0)), ("a1".to_string(), phrase(0.5))]);
    Gesture::from_curves(chain(2), space.clone(), curves, Flavor::Symbolic).expect("score is well formed")
}

fn map(spec: &MapSpec, source: &SpaceRef, target: &SpaceRef) -> SpaceMap {
    spec.build(source, target).expect("corpus maps are well formed")
}

/// Adds `amount·sin(πt)` to coordinate 1 of every interior sample.
fn wobble(g: &Gesture, amount: f64) -> Gesture {
    let curves = g
        .arrow_curves()
        .iter()
        .map(|(a, c)| {
            let n = c.len();
            let samples = c
                .samples()
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let mut q = p.clone();
                    if i > 0 && i + 1 < n {
                        q[1] += amount * (PI * grid_time(i, n)).sin();
                    }
                    q
                })
                .collect();
            (a.clone(), Curve::new(g.space().clone(), samples, c.continuity()).expect("finite"))
        })
        .collect();
    Gesture::new(g.skeleton().clone(), g.space().clone(), g.vertex_points().clone(), curves, g.flavor())
        .expect("wobble keeps the structure")
}

/// The instrument's rendition of the score.
pub fn instrument_base(name: &str) -> Gesture {
    let c = conductor_space();
    let g = apply_spacemap_to_gesture(&map(&embed_spec(name), &c, &instrument_space(name)), &score(&c))
        .expect("embedding matches the score space");
    if name == "percussion" {
        wobble(&g, PERCUSSION_WOBBLE)
    } else {
        g
    }
}

fn warp_samples(strength: f64) -> Vec<f64> {
    (0..WARP_SAMPLES)
        .map(|i| {
            let t = grid_time(i, WARP_SAMPLES);
            t + strength * t * (1.0 - t)
        })
        .collect()
}

/// The operator registry shipped with the corpus.
pub fn registry() -> OperatorsFile {
    let any = instrument_space("piano");
    let generic = |op: PotentialOperator| OperatorEntry {
        space: None,
        operator: op.kind().clone(),
    };
    let conductor = conductor_space();
    let operators = BTreeMap::from([
        ("forte".to_string(), generic(forte(&any).expect("preset"))),
        ("piano".to_string(), generic(piano(&any).expect("preset"))),
        ("crescendo".to_string(), generic(crescendo(&any).expect("preset"))),
        (
            "forte_beat".to_string(),
            OperatorEntry {
                space: Some(conductor.name().to_string()),
                operator: forte_on(&conductor, "beat_amplitude").expect("preset").kind().clone(),
            },
        ),
        (
            "staccato".to_string(),
            OperatorEntry {
                space: None,
                operator: OperatorKind::Composite {
                    steps: vec![
                        OperatorKind::TimeWarp {
                            samples: warp_samples(0.9),
                        },
                        OperatorKind::AmplitudeScale {
                            coords: vec!["loudness".into()],
                            factor: 1.6,
                        },
                    ],
                },
            },
        ),
        (
            "piano_hammer".to_string(),
            OperatorEntry {
                space: Some("piano".into()),
                operator: OperatorKind::Composite {
                    steps: vec![
                        OperatorKind::AmplitudeScale {
                            coords: vec!["loudness".into()],
                            factor: 2.0,
                        },
                        OperatorKind::Offset {
                            offsets: BTreeMap::from([("hand_height".to_string(), -0.3)]),
                        },
                    ],
                },
            },
        ),
    ]);
    OperatorsFile {
        schema_version: SCHEMA_VERSION,
        operators,
    }
}

/// Loudness envelope of one note: held (legato) or clipped (staccato).
fn note_loudness(s: f64, staccato: bool) -> f64 {
    const REST: f64 = 0.45;
    if s <= 0.0 || s >= 1.0 {
        return REST;
    }
    if !staccato {
        return REST + 0.05 * (PI * s).sin();
    }
    match s {
        s if s <= 0.1 => REST + (0.6 - REST) * s / 0.1,
        s if s <= 0.35 => 0.6 - (0.6 - 0.05) * (s - 0.1) / 0.25,
        s if s <= 0.9 => 0.05,
        s => 0.05 + (REST - 0.05) * (s - 0.9) / 0.1,
    }
}

/// Four notes on a chain; loudness scaled by `gain`.
pub fn phrase(space: &SpaceRef, staccato: bool, gain: f64) -> Gesture {
    let notes = 4;
    let (slope, intercept) = body_line(space.name());
    let curves = (0..notes)
        .map(|k| {
            let c = Curve::from_fn(space.clone(), NOTE_SAMPLES, Continuity::PiecewiseWithJumps, |s| {
                let u = if s >= 1.0 { (k + 1) as f64 / notes as f64 } else { (k as f64 + s) / notes as f64 };
                vec![u, slope * u + intercept, gain * note_loudness(s, staccato)]
            })
            .expect("finite");
            (format!("a{k}"), c)
        })
        .collect();
    Gesture::from_curves(chain(notes), space.clone(), curves, Flavor::Symbolic).expect("phrase is well formed")
}

pub fn keyboard_space() -> SpaceRef {
    space("keyboard", vec![unit("time", "s"), unit("key_depth", "")])
}

/// A key pressed at mid-gesture: depth jumps from 0 to 1.
pub fn keypress_step() -> Gesture {
    let c = Curve::from_fn(keyboard_space(), STEP_SAMPLES, Continuity::PiecewiseWithJumps, |t| {
        vec![t, if t < 0.5 { 0.0 } else { 1.0 }]
    })
    .expect("finite");
    Gesture::from_curves(
        make_arrow_skeleton(),
        keyboard_space(),
        BTreeMap::from([("a0".to_string(), c)]),
        Flavor::Symbolic,
    )
    .expect("step is well formed")
}

#[derive(Serialize)]
struct MorphismOut {
    schema_version: u32,
    source_space: String,
    target_space: String,
    map: MapSpec,
}

fn leg_map(spec: &MapSpec) -> serde_json::Value {
    serde_json::to_value(spec).expect("maps serialize")
}

fn scenario(instruments: &[(&str, &str)], edges: &[(&str, &str)], with_stage: bool) -> serde_json::Value {
    let parts: Vec<_> = instruments
        .iter()
        .map(|(name, op)| {
            json!({
                "name": name,
                "gesture": format!("../bases/{name}_base.json"),
                "operator": op,
                "conductor_leg": leg_map(&project_spec()),
                "listener_leg": leg_map(&embed_spec(name)),
            })
        })
        .collect();
    let edge_list: Vec<_> = edges
        .iter()
        .map(|(s, t)| json!({"id": format!("{s}→{t}"), "source": s, "target": t, "map": leg_map(&transfer_spec(t))}))
        .collect();
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "operators": "../operators.json",
        "tolerance": 1e-2,
        "instruments": parts,
        "edges": edge_list,
        "conductor": {"gesture": "conductor_score.json", "operator": "forte_beat"},
        "listener": {"gesture": "listener.json"},
        "reversed": with_stage,
    });
    if with_stage {
        let legs: serde_json::Map<String, serde_json::Value> = instruments
            .iter()
            .map(|(name, _)| (name.to_string(), leg_map(&hall_leg_spec())))
            .collect();
        doc["stage"] = json!({
            "gesture": "stage.json",
            "legs": legs,
            "candidates": [leg_map(&hall_spec(1.0)), leg_map(&hall_spec(2.0))],
        });
    }
    doc
}

fn write_json(out: &Path, rel: &str, value: &impl Serialize, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = out.join(rel);
    write_file(&path, &to_json_exact(value))?;
    written.push(path);
    Ok(())
}

fn write_g(out: &Path, rel: &str, g: &Gesture, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = out.join(rel);
    write_gesture(&path, g)?;
    written.push(path);
    Ok(())
}

/// Writes the whole corpus under `out`; returns the files in write order.
pub fn write_corpus(out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    let reg = registry();
    write_json(out, "operators.json", &reg, &mut written)?;

    let op = |label: &str, g: &Gesture| -> Result<Gesture, CliError> {
        let f = reg.instantiate(label, g.space(), &BTreeMap::new())?;
        Ok(apply_potential(&f, g)?)
    };

    for (name, ..) in INSTRUMENTS {
        write_g(out, &format!("bases/{name}_base.json"), &instrument_base(name), &mut written)?;
    }

    let matrix_instruments = ["piano", "percussion", "violin"];
    let mut generators = BTreeMap::new();
    let mut bases = BTreeMap::new();
    for name in matrix_instruments {
        let base = instrument_base(name);
        for dynamic in ["forte", "piano"] {
            let file = format!("{name}_{dynamic}.json");
            write_g(out, &format!("matrix/{file}"), &op(dynamic, &base)?, &mut written)?;
            generators.insert(file.clone(), dynamic.to_string());
            bases.insert(file, format!("../bases/{name}_base.json"));
        }
    }
    let maps: Vec<_> = [("piano", "percussion"), ("piano", "violin"), ("percussion", "violin")]
        .iter()
        .map(|(s, t)| json!({"source": s, "target": t, "map": leg_map(&transfer_spec(t))}))
        .collect();
    let manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "operators": "../operators.json",
        "generators": generators,
        "bases": bases,
        "maps": maps,
        "synthesis": {"amplitude": "loudness", "seconds_per_arrow": 1.0},
    });
    write_json(out, "matrix/corpus.json", &manifest, &mut written)?;

    for (s, t) in [("piano", "percussion"), ("piano", "violin")] {
        let m = MorphismOut {
            schema_version: SCHEMA_VERSION,
            source_space: s.into(),
            target_space: t.into(),
            map: transfer_spec(t),
        };
        write_json(out, &format!("morphisms/{s}_to_{t}.json"), &m, &mut written)?;
    }

    let piano_base = instrument_base("piano");
    let piano_soft = op("piano", &piano_base)?;
    write_g(out, "variants/piano_crescendo.json", &op("crescendo", &piano_soft)?, &mut written)?;
    let staccato = op("staccato", &piano_base)?;
    write_g(out, "variants/piano_staccato.json", &staccato, &mut written)?;
    let mut broken = crate::format::GestureFile::of(&piano_base);
    if let Some(first) = broken.arrow_curves.get_mut("a1").and_then(|c| c.samples.first_mut()) {
        first[2] += 0.25;
    }
    write_json(out, "variants/endpoint_mismatch.json", &broken, &mut written)?;

    let piano_space = instrument_space("piano");
    let violin_space = instrument_space("violin");
    write_g(out, "nonsim/legato_piano.json", &phrase(&piano_space, false, 1.0), &mut written)?;
    write_g(out, "nonsim/staccato_piano.json", &phrase(&piano_space, true, 1.6), &mut written)?;
    write_g(out, "nonsim/legato_violin.json", &phrase(&violin_space, false, 1.0), &mut written)?;
    write_g(out, "nonsim/legato_violin_forte.json", &phrase(&violin_space, false, 1.6), &mut written)?;
    let nonsim = json!({
        "schema_version": SCHEMA_VERSION,
        "operators": "../operators.json",
        "g0": "legato_piano.json",
        "g1": "staccato_piano.json",
        "h0": "legato_violin.json",
        "h1": "legato_violin_forte.json",
        "map": leg_map(&transfer_spec("violin")),
        "generators": ["staccato", "forte"],
        "amplitude": "loudness",
    });
    write_json(out, "nonsim/nonsim.json", &nonsim, &mut written)?;

    write_g(out, "perform/keypress_step.json", &keypress_step(), &mut written)?;

    let c = conductor_space();
    write_g(out, "scenarios/conductor_score.json", &score(&c), &mut written)?;
    write_g(out, "scenarios/listener.json", &score(&listener_space()), &mut written)?;
    let stage = apply_spacemap_to_gesture(&map(&hall_spec(1.0), &c, &stage_space()), &score(&c))?;
    write_g(out, "scenarios/stage.json", &stage, &mut written)?;
    let trio = scenario(
        &[("piano", "forte"), ("percussion", "forte"), ("violin", "forte")],
        &[("piano", "percussion"), ("piano", "violin")],
        true,
    );
    write_json(out, "scenarios/trio.json", &trio, &mut written)?;
    let hammer = scenario(&[("piano", "forte"), ("flute", "piano_hammer")], &[("piano", "flute")], false);
    write_json(out, "scenarios/flute_hammer.json", &hammer, &mut written)?;
    let empty = scenario(&[], &[], false);
    write_json(out, "scenarios/empty.json", &empty, &mut written)?;
    Ok(written)
}
