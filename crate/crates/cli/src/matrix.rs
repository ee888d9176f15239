use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use gesture_core::curvespace::SpaceMap;
use gesture_core::gesture::Gesture;
use gesture_core::similarity::{check_similarity, Generator, SimilarityQuery, SimilarityReport, SynthesisMapping};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commands::{best_morphism, Flags, Outcome};
use crate::error::CliError;
use crate::format::{read_gesture, read_json, read_operators, resolve, round_sig, to_json, write_file, MapSpec, OperatorsFile, SCHEMA_VERSION};

/// Name of the optional manifest inside a corpus directory.
pub const MANIFEST: &str = "corpus.json";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceMapEntry {
    pub source: String,
    pub target: String,
    pub map: MapSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisSpec {
    pub amplitude: String,
    #[serde(default = "one_second")]
    pub seconds_per_arrow: f64,
}

fn one_second() -> f64 {
    1.0
}

/// Generators, bases and cross-space maps for the files of a corpus.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusManifest {
    pub schema_version: u32,
    pub operators: String,
    pub generators: BTreeMap<String, String>,
    #[serde(default)]
    pub bases: BTreeMap<String, String>,
    #[serde(default)]
    pub maps: Vec<SpaceMapEntry>,
    #[serde(default)]
    pub synthesis: Option<SynthesisSpec>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub row: String,
    pub col: String,
    /// Files in the order the morphism runs.
    pub direction: Option<(String, String)>,
    pub degree: Option<f64>,
    pub identical: bool,
    pub report: Option<SimilarityReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixReport {
    pub schema_version: u32,
    pub files: Vec<String>,
    pub eta: f64,
    pub r0: f64,
    pub degrees: Vec<Vec<Option<f64>>>,
    pub pairs: Vec<PairReport>,
}

impl MatrixReport {
    pub fn resolved(&self) -> bool {
        self.degrees.iter().flatten().all(Option::is_some)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("file");
        for f in &self.files {
            out.push(',');
            out.push_str(f);
        }
        out.push('\n');
        for (f, row) in self.files.iter().zip(&self.degrees) {
            out.push_str(f);
            for cell in row {
                out.push(',');
                if let Some(d) = cell {
                    out.push_str(&round_sig(*d).to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

struct Entry {
    file: String,
    gesture: Gesture,
    generator: Option<Generator>,
}

struct Corpus {
    entries: Vec<Entry>,
    maps: Vec<(String, String, MapSpec)>,
    synthesis: Option<SynthesisMapping>,
}

fn load_corpus(dir: &Path) -> Result<Corpus, CliError> {
    let mut files: Vec<String> = fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|name| name.ends_with(".json") && name != MANIFEST)
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Input(format!("{}: no gesture files", dir.display())));
    }
    let gestures = files
        .iter()
        .map(|f| read_gesture(&dir.join(f)))
        .collect::<Result<Vec<_>, _>>()?;
    let manifest_path = dir.join(MANIFEST);
    let manifest: Option<CorpusManifest> = manifest_path.exists().then(|| read_json(&manifest_path)).transpose()?;
    if let Some(m) = &manifest {
        if m.schema_version != SCHEMA_VERSION {
            return Err(CliError::Input(format!("{}: unsupported schema_version", manifest_path.display())));
        }
    }
    let registry: Option<OperatorsFile> = manifest
        .as_ref()
        .map(|m| read_operators(&resolve(&manifest_path, &m.operators)))
        .transpose()?;
    let known = gestures
        .iter()
        .map(|g| (g.space().name().to_string(), g.space().clone()))
        .collect();
    let mut entries = Vec::with_capacity(files.len());
    for (file, gesture) in files.into_iter().zip(gestures) {
        let generator = match (&manifest, &registry) {
            (Some(m), Some(reg)) => match m.generators.get(&file) {
                Some(label) => {
                    let mut gen = Generator::new(reg.instantiate(label, gesture.space(), &known)?);
                    if let Some(base) = m.bases.get(&file) {
                        gen = gen.with_base(read_gesture(&resolve(&manifest_path, base))?);
                    }
                    Some(gen)
                }
                None => None,
            },
            _ => None,
        };
        entries.push(Entry {
            file,
            gesture,
            generator,
        });
    }
    let maps = manifest
        .as_ref()
        .map(|m| m.maps.iter().map(|e| (e.source.clone(), e.target.clone(), e.map.clone())).collect())
        .unwrap_or_default();
    let synthesis = manifest
        .and_then(|m| m.synthesis)
        .map(|s| SynthesisMapping::new(s.amplitude).with_seconds(s.seconds_per_arrow));
    Ok(Corpus {
        entries,
        maps,
        synthesis,
    })
}

impl Corpus {
    fn map_between(&self, a: &Gesture, b: &Gesture) -> Result<Option<SpaceMap>, CliError> {
        if a.space() == b.space() {
            return Ok(Some(SpaceMap::identity(a.space())));
        }
        self.maps
            .iter()
            .find(|(s, t, _)| s == a.space().name() && t == b.space().name())
            .map(|(_, _, m)| m.build(a.space(), b.space()))
            .transpose()
            .map_err(CliError::from)
    }

    fn pair(&self, i: usize, j: usize, flags: &Flags) -> PairReport {
        let (a, b) = (&self.entries[i], &self.entries[j]);
        let mut out = PairReport {
            row: a.file.clone(),
            col: b.file.clone(),
            direction: None,
            degree: None,
            identical: false,
            report: None,
            error: None,
        };
        if i == j || a.gesture == b.gesture {
            out.degree = Some(1.0);
            out.identical = true;
            return out;
        }
        match self.compare(a, b, flags) {
            Ok((direction, report)) => {
                out.direction = Some(direction);
                out.degree = Some(report.degree);
                out.report = Some(report);
            }
            Err(e) => out.error = Some(e.to_string()),
        }
        out
    }

    fn compare(&self, a: &Entry, b: &Entry, flags: &Flags) -> Result<((String, String), SimilarityReport), CliError> {
        let (src, dst, m) = match self.map_between(&a.gesture, &b.gesture)? {
            Some(m) => (a, b, m),
            None => match self.map_between(&b.gesture, &a.gesture)? {
                Some(m) => (b, a, m),
                None => {
                    return Err(CliError::Input(format!(
                        "no map between `{}` and `{}`",
                        a.gesture.space().name(),
                        b.gesture.space().name()
                    )))
                }
            },
        };
        let morphism = best_morphism(&src.gesture, &dst.gesture, &m, flags)?;
        let mut query = SimilarityQuery::new(src.gesture.clone(), dst.gesture.clone(), morphism)
            .eta(flags.eta)
            .r0(flags.r0);
        query.g_generator = src.generator.clone();
        query.h_generator = dst.generator.clone();
        if let Some(s) = &self.synthesis {
            query = query.synthesis(s.clone(), s.clone());
        }
        let report = check_similarity(&query, &flags.options())?;
        Ok(((src.file.clone(), dst.file.clone()), report))
    }
}

/// Pairwise degrees over every gesture file of `dir`, rows sorted by name.
pub fn similarity_matrix(dir: &Path, flags: &Flags) -> Result<MatrixReport, CliError> {
    let corpus = load_corpus(dir)?;
    let n = corpus.entries.len();
    let upper: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let pairs: Vec<PairReport> = upper.par_iter().map(|&(i, j)| corpus.pair(i, j, flags)).collect();
    let mut degrees = vec![vec![None; n]; n];
    for (&(i, j), p) in upper.iter().zip(&pairs) {
        degrees[i][j] = p.degree;
        degrees[j][i] = p.degree;
    }
    Ok(MatrixReport {
        schema_version: SCHEMA_VERSION,
        files: corpus.entries.into_iter().map(|e| e.file).collect(),
        eta: flags.eta,
        r0: flags.r0,
        degrees,
        pairs: pairs.into_iter().filter(|p| p.row != p.col).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Runs the matrix on `threads` workers (0: rayon's default) and prints it
/// in `format`; `out` also receives both `matrix.csv` and `matrix.json`.
pub fn matrix(dir: &Path, flags: &Flags, threads: usize, format: Format, out: Option<&Path>) -> Result<Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    let report = pool.install(|| similarity_matrix(dir, flags))?;
    let (json, csv) = (to_json(&report), report.to_csv());
    if let Some(out) = out {
        write_file(&out.join("matrix.json"), &json)?;
        write_file(&out.join("matrix.csv"), &csv)?;
    }
    let stdout = match format {
        Format::Json => json,
        Format::Csv => csv,
    };
    Ok(Outcome::new(if report.resolved() { 0 } else { 1 }, stdout))
}
