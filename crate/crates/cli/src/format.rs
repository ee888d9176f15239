use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gesture_core::curvespace::{ConfigSpace, Continuity, Curve, Dimension, SpaceMap, SpaceRef};
use gesture_core::gesture::{Flavor, Gesture};
use gesture_core::potential::{OperatorKind, PotentialOperator};
use gesture_core::skeleton::{Digraph, DigraphMorphism};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
const SIGNIFICANT_DIGITS: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimSpec {
    pub name: String,
    pub unit: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub name: String,
    pub dims: Vec<DimSpec>,
}

impl SpaceSpec {
    pub fn of(space: &SpaceRef) -> Self {
        Self {
            name: space.name().to_string(),
            dims: space
                .dims()
                .iter()
                .map(|d| DimSpec {
                    name: d.name.clone(),
                    unit: d.unit.clone(),
                    min: d.min,
                    max: d.max,
                })
                .collect(),
        }
    }

    pub fn build(&self) -> Result<SpaceRef, gesture_core::Error> {
        ConfigSpace::new(
            self.name.clone(),
            self.dims.iter().map(|d| Dimension::new(d.name.clone(), d.unit.clone(), d.min, d.max)).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowSpec {
    pub id: String,
    pub tail: String,
    pub head: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkeletonSpec {
    pub vertices: Vec<String>,
    pub arrows: Vec<ArrowSpec>,
}

impl SkeletonSpec {
    pub fn of(d: &Digraph) -> Self {
        Self {
            vertices: d.vertices().map(str::to_string).collect(),
            arrows: d
                .arrows()
                .map(|(id, inc)| ArrowSpec {
                    id: id.to_string(),
                    tail: inc.tail.clone(),
                    head: inc.head.clone(),
                })
                .collect(),
        }
    }

    pub fn build(&self) -> Result<Digraph, gesture_core::Error> {
        Digraph::new(
            self.vertices.clone(),
            self.arrows.iter().map(|a| (a.id.clone(), a.tail.clone(), a.head.clone())),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub samples: Vec<Vec<f64>>,
}

/// On-disk gesture document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureFile {
    pub schema_version: u32,
    pub space: SpaceSpec,
    pub skeleton: SkeletonSpec,
    pub vertex_points: BTreeMap<String, Vec<f64>>,
    pub arrow_curves: BTreeMap<String, CurveSpec>,
    pub flavor: Flavor,
    pub speed_bound: Option<f64>,
}

impl GestureFile {
    pub fn of(g: &Gesture) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            space: SpaceSpec::of(g.space()),
            skeleton: SkeletonSpec::of(g.skeleton()),
            vertex_points: g.vertex_points().clone(),
            arrow_curves: g
                .arrow_curves()
                .iter()
                .map(|(a, c)| (a.clone(), CurveSpec { samples: c.samples().to_vec() }))
                .collect(),
            flavor: g.flavor(),
            speed_bound: g.speed_bound(),
        }
    }

    /// Builds the gesture without validating it.
    pub fn build(&self) -> Result<Gesture, gesture_core::Error> {
        let space = self.space.build()?;
        let skeleton = self.skeleton.build()?;
        let continuity = match self.flavor {
            Flavor::Symbolic => Continuity::PiecewiseWithJumps,
            Flavor::Physical => Continuity::Continuous {
                speed_bound: self.speed_bound,
            },
        };
        let curves = self
            .arrow_curves
            .iter()
            .map(|(a, c)| Ok((a.clone(), Curve::new(space.clone(), c.samples.clone(), continuity)?)))
            .collect::<Result<BTreeMap<_, _>, gesture_core::Error>>()?;
        Gesture::new(skeleton, space, self.vertex_points.clone(), curves, self.flavor)
    }
}

/// A space map whose source and target come from context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Identity {},
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    Permutation { perm: Vec<usize> },
}

impl MapSpec {
    pub fn build(&self, source: &SpaceRef, target: &SpaceRef) -> Result<SpaceMap, gesture_core::Error> {
        match self {
            MapSpec::Identity {} => SpaceMap::affine(
                source.clone(),
                target.clone(),
                (0..target.dim())
                    .map(|i| (0..source.dim()).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect(),
                vec![0.0; target.dim()],
            ),
            MapSpec::Affine { matrix, offset } => {
                SpaceMap::affine(source.clone(), target.clone(), matrix.clone(), offset.clone())
            }
            MapSpec::Permutation { perm } => SpaceMap::permutation(source.clone(), target.clone(), perm.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkeletonMapSpec {
    pub vertices: BTreeMap<String, String>,
    pub arrows: BTreeMap<String, String>,
}

/// A gesture morphism between two gestures named on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismFile {
    pub schema_version: u32,
    pub source_space: String,
    pub target_space: String,
    pub map: MapSpec,
    /// Omitted: the best-fitting digraph morphism is chosen.
    #[serde(default)]
    pub skeleton_map: Option<SkeletonMapSpec>,
}

impl SkeletonMapSpec {
    pub fn build(&self, source: &Digraph, target: &Digraph) -> Result<DigraphMorphism, gesture_core::Error> {
        DigraphMorphism::new(source.clone(), target.clone(), self.vertices.clone(), self.arrows.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorEntry {
    /// Restricts the operator to one space; otherwise it is instantiated on
    /// whatever space it is asked for.
    #[serde(default)]
    pub space: Option<String>,
    pub operator: OperatorKind,
}

/// Registry of named potential operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorsFile {
    pub schema_version: u32,
    pub operators: BTreeMap<String, OperatorEntry>,
}

impl OperatorsFile {
    /// The operator `label` as it acts on `on`. A space-restricted entry is
    /// built on its own space, looked up in `known`, so that applying it
    /// elsewhere surfaces as a space mismatch.
    pub fn instantiate(
        &self,
        label: &str,
        on: &SpaceRef,
        known: &BTreeMap<String, SpaceRef>,
    ) -> Result<PotentialOperator, CliError> {
        let entry = self
            .operators
            .get(label)
            .ok_or_else(|| CliError::Input(format!("operator `{label}` is not in the registry")))?;
        let space = match &entry.space {
            Some(name) if name != on.name() => known.get(name).cloned().ok_or_else(|| {
                CliError::Domain(gesture_core::Error::SpaceMismatch {
                    expected: on.name().to_string(),
                    found: name.clone(),
                    context: format!(" (operator `{label}`)"),
                })
            })?,
            _ => on.clone(),
        };
        Ok(PotentialOperator::new(label, space, entry.operator.clone())?)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn check_version(version: u32, path: &Path) -> Result<(), CliError> {
    if version == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "{}: unsupported schema_version {version}",
            path.display()
        )))
    }
}

/// Parses a gesture file; does not validate it.
pub fn read_gesture_unchecked(path: &Path) -> Result<Gesture, CliError> {
    let file: GestureFile = read_json(path)?;
    check_version(file.schema_version, path)?;
    file.build().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Parses a gesture file and rejects it unless it validates.
pub fn read_gesture(path: &Path) -> Result<Gesture, CliError> {
    let g = read_gesture_unchecked(path)?;
    let report = g.validate();
    if report.is_valid() {
        Ok(g)
    } else {
        Err(CliError::Invalid {
            path: path.display().to_string(),
            report: to_json(&report),
        })
    }
}

pub fn read_operators(path: &Path) -> Result<OperatorsFile, CliError> {
    let file: OperatorsFile = read_json(path)?;
    check_version(file.schema_version, path)?;
    Ok(file)
}

pub fn read_morphism(path: &Path) -> Result<MorphismFile, CliError> {
    let file: MorphismFile = read_json(path)?;
    check_version(file.schema_version, path)?;
    Ok(file)
}

/// `path` relative to the directory of the config file that names it.
pub fn resolve(config: &Path, path: &str) -> PathBuf {
    config.parent().unwrap_or(Path::new(".")).join(path)
}

/// Rounds a float to nine significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(0.0));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with every float rounded to nine significant digits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize");
    let mut out = serde_json::to_string_pretty(&round_value(v)).expect("values serialize");
    out.push('\n');
    out
}

/// Exact JSON for data files that must round-trip bit for bit.
pub fn to_json_exact<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("files serialize");
    out.push('\n');
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_gesture(path: &Path, g: &Gesture) -> Result<(), CliError> {
    write_file(path, &to_json_exact(&GestureFile::of(g)))
}
