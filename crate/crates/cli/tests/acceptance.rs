//! Acceptance criteria, one line each. `cargo test --test acceptance -- --nocapture`
//! shows the table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use gesture_cli::corpus;
use gesture_cli::{commands, matrix, Flags};
use gesture_core::check::CheckOptions;
use gesture_core::curvespace::{
    grid_time, nabla_compose, probe_curves, ConfigSpace, Continuity, Curve, Dimension, NablaMorphism, SpaceMap,
    SpaceRef,
};
use gesture_core::gesture::{
    apply_spacemap_to_gesture, check_morphism, curry_addressed, gesture_distance, performance_smooth, uncurry,
    AddressGrid, AddressedSamples, Flavor, Gesture, GestureMorphism,
};
use gesture_core::orchestra::{build_orchestra_scenario, verify_orchestra};
use gesture_core::potential::{
    apply_potential, compose_vertical, crescendo, forte, interchange_check, piano, OperatorKind, PotentialOperator,
};
use gesture_core::similarity::{check_similarity, Generator, SimilarityQuery, SPECTRAL_THRESHOLD};
use gesture_core::skeleton::{chain, Digraph, DigraphMorphism};
use gesture_core::Error;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn shipped(rel: &str) -> PathBuf {
    root().join("corpus").join(rel)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// Random instances

fn random_space(r: &mut ChaCha8Rng, name: &str, dim: usize) -> SpaceRef {
    let dims = (0..dim)
        .map(|k| {
            let min = r.random_range(-20.0..20.0);
            Dimension::new(format!("c{k}"), "", min, min + r.random_range(0.5..40.0))
        })
        .collect();
    ConfigSpace::new(name, dims).unwrap()
}

fn random_gesture(r: &mut ChaCha8Rng, space: &SpaceRef, arrows: usize, n: usize) -> Gesture {
    let mut curves = BTreeMap::new();
    let mut previous: Option<Vec<f64>> = None;
    for i in 0..arrows {
        let params: Vec<[f64; 4]> = space
            .dims()
            .iter()
            .map(|_| {
                [
                    r.random_range(0.3..0.7),
                    r.random_range(0.0..0.2),
                    r.random_range(1.0..3.0),
                    r.random_range(0.0..6.0),
                ]
            })
            .collect();
        let mut samples: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let t = grid_time(j, n);
                space
                    .dims()
                    .iter()
                    .zip(&params)
                    .map(|(d, [c, a, f, p])| d.min + d.width() * (c + a * (std::f64::consts::TAU * f * t + p).sin()))
                    .collect()
            })
            .collect();
        if let Some(end) = previous.take() {
            samples[0] = end;
        }
        previous = Some(samples[n - 1].clone());
        curves.insert(format!("a{i}"), Curve::new(space.clone(), samples, Continuity::PiecewiseWithJumps).unwrap());
    }
    Gesture::from_curves(chain(arrows), space.clone(), curves, Flavor::Symbolic).unwrap()
}

fn random_affine(r: &mut ChaCha8Rng, x: &SpaceRef, y: &SpaceRef) -> SpaceMap {
    let matrix = (0..y.dim())
        .map(|i| {
            (0..x.dim())
                .map(|j| {
                    let scale = y.dims()[i].width() / x.dims()[j].width();
                    scale * (if i == j { 1.0 } else { 0.0 } + r.random_range(-0.5..0.5))
                })
                .collect()
        })
        .collect();
    let offset = y.dims().iter().map(|d| r.random_range(-0.1..0.1) * d.width()).collect();
    SpaceMap::affine(x.clone(), y.clone(), matrix, offset).unwrap()
}

fn relabel(d: &Digraph, prefix: &str) -> DigraphMorphism {
    let vmap: BTreeMap<String, String> = d.vertices().map(|v| (v.to_string(), format!("{prefix}{v}"))).collect();
    let amap: BTreeMap<String, String> = d.arrows().map(|(a, _)| (a.to_string(), format!("{prefix}{a}"))).collect();
    let arrows = d
        .arrows()
        .map(|(a, inc)| (amap[a].clone(), vmap[&inc.tail].clone(), vmap[&inc.head].clone()));
    let copy = Digraph::new(vmap.values().cloned(), arrows).unwrap();
    DigraphMorphism::new(d.clone(), copy, vmap, amap).unwrap()
}

/// `ṁ(g)` moved onto the skeleton `t.target()`.
fn image(g: &Gesture, m: &SpaceMap, t: &DigraphMorphism) -> Gesture {
    let mapped = apply_spacemap_to_gesture(m, g).unwrap();
    let curves = mapped
        .arrow_curves()
        .iter()
        .map(|(a, c)| (t.map_arrow(a).unwrap().to_string(), c.clone()))
        .collect();
    Gesture::from_curves(t.target().clone(), m.target().clone(), curves, g.flavor()).unwrap()
}

/// Bends interior samples of coordinate 0 by up to `delta` (normalized).
fn bend(g: &Gesture, delta: f64) -> Gesture {
    let width = g.space().dims()[0].width();
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
                        q[0] += delta * width * (std::f64::consts::PI * grid_time(i, n)).sin();
                    }
                    q
                })
                .collect();
            (a.clone(), Curve::new(g.space().clone(), samples, c.continuity()).unwrap())
        })
        .collect();
    Gesture::new(g.skeleton().clone(), g.space().clone(), g.vertex_points().clone(), curves, g.flavor()).unwrap()
}

// Criteria

fn criterion_1() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut worst_slack = f64::INFINITY;
    for i in 0..200 {
        let (dx, dy, dz) = (r.random_range(1..=4), r.random_range(1..=4), r.random_range(1..=4));
        let x = random_space(&mut r, "x", dx);
        let y = random_space(&mut r, "y", dy);
        let z = random_space(&mut r, "z", dz);
        let arrows = r.random_range(1..=3);
        let n = r.random_range(9..=65);
        let g = random_gesture(&mut r, &x, arrows, n);
        let m1 = random_affine(&mut r, &x, &y);
        let t1 = relabel(g.skeleton(), "p");
        let h = image(&g, &m1, &t1);
        let gm1 = GestureMorphism::new(t1.clone(), m1.clone(), 1e-9).map_err(fail)?;
        let exact = check_morphism(&gm1, &g, &h).map_err(fail)?.residual;
        worst = worst.max(exact);
        ensure(exact <= 1e-9, || format!("instance {i}: constructed residual {exact:e}"))?;

        let m2 = random_affine(&mut r, &y, &z);
        let t2 = relabel(h.skeleton(), "q");
        let h_bent = bend(&h, r.random_range(0.0..0.05));
        let k = bend(&image(&h, &m2, &t2), r.random_range(0.0..0.05));
        let gm1 = GestureMorphism::new(t1, m1, 1.0).map_err(fail)?;
        let gm2 = GestureMorphism::new(t2, m2.clone(), 1.0).map_err(fail)?;
        let r1 = check_morphism(&gm1, &g, &h_bent).map_err(fail)?.residual;
        let r2 = check_morphism(&gm2, &h_bent, &k).map_err(fail)?.residual;
        let r12 = check_morphism(&gm1.then(&gm2).map_err(fail)?, &g, &k).map_err(fail)?.residual;
        let bound = r2 + m2.lipschitz_bound().ok_or("no Lipschitz bound")? * r1;
        worst_slack = worst_slack.min(bound - r12);
        ensure(r12 <= bound + 1e-12, || format!("instance {i}: {r12} exceeds {bound}"))?;
    }
    Ok(format!(
        "200 instances, max constructed residual {worst:.1e}, min composition slack {worst_slack:.1e}"
    ))
}

fn piano_space_and_bases() -> (Gesture, Gesture) {
    (corpus::instrument_base("piano"), corpus::instrument_base("percussion"))
}

fn identity_case() -> Outcome {
    let (g, _) = piano_space_and_bases();
    let f = forte(g.space()).map_err(fail)?;
    let fg = apply_potential(&f, &g).map_err(fail)?;
    let q = SimilarityQuery::new(fg.clone(), fg.clone(), GestureMorphism::identity(&fg))
        .generators(Generator::new(f.clone()), Generator::new(f));
    let report = check_similarity(&q, &CheckOptions::default()).map_err(fail)?;
    ensure(report.similar && report.degree == 1.0, || format!("{report:?}"))?;
    Ok("identity: similar, degree 1".into())
}

fn missing_generator() -> Outcome {
    let (g, _) = piano_space_and_bases();
    let q = SimilarityQuery::new(g.clone(), g.clone(), GestureMorphism::identity(&g));
    match check_similarity(&q, &CheckOptions::default()) {
        Err(Error::MissingGenerator(_)) => Ok("no generators: MissingGenerator".into()),
        other => Err(format!("expected MissingGenerator, got {other:?}")),
    }
}

fn forte_vs_piano() -> Outcome {
    let (g, _) = piano_space_and_bases();
    let (f, p) = (forte(g.space()).map_err(fail)?, piano(g.space()).map_err(fail)?);
    let fg = apply_potential(&f, &g).map_err(fail)?;
    let q = SimilarityQuery::new(fg.clone(), fg.clone(), GestureMorphism::identity(&fg))
        .generators(Generator::new(f), Generator::new(p));
    let report = check_similarity(&q, &CheckOptions::default()).map_err(fail)?;
    ensure(!report.similar, || format!("{report:?}"))?;
    Ok(format!("forte vs piano: not similar, degree {:.2e}", report.degree))
}

fn space_mismatch() -> Outcome {
    let flute = corpus::instrument_base("flute");
    let piano_space = corpus::instrument_space("piano");
    let registry = corpus::registry();
    let hammer = registry
        .instantiate("piano_hammer", &piano_space, &BTreeMap::from([("piano".to_string(), piano_space.clone())]))
        .map_err(fail)?;
    let q = SimilarityQuery::new(flute.clone(), flute.clone(), GestureMorphism::identity(&flute))
        .generators(Generator::new(hammer.clone()), Generator::new(hammer));
    match check_similarity(&q, &CheckOptions::default()) {
        Err(Error::SpaceMismatch { .. }) => Ok("piano operator on flute: SpaceMismatch".into()),
        other => Err(format!("expected SpaceMismatch, got {other:?}")),
    }
}

fn criterion_2() -> Outcome {
    let parts = [identity_case(), missing_generator(), forte_vs_piano(), space_mismatch()];
    let mut lines = Vec::new();
    for p in parts {
        lines.push(p?);
    }
    Ok(lines.join("; "))
}

fn criterion_3() -> Outcome {
    let g = corpus::instrument_base("piano");
    let space = g.space();
    let (p, pf, f) = (piano(space).map_err(fail)?, crescendo(space).map_err(fail)?, forte(space).map_err(fail)?);
    let fused = compose_vertical(&p, &pf).map_err(fail)?;
    let fused_residual = gesture_distance(&apply_potential(&fused, &g).map_err(fail)?, &apply_potential(&f, &g).map_err(fail)?)
        .map_err(fail)?;
    let sequential = apply_potential(&pf, &apply_potential(&p, &g).map_err(fail)?).map_err(fail)?;
    let sequential_residual = gesture_distance(&sequential, &apply_potential(&f, &g).map_err(fail)?).map_err(fail)?;
    ensure(fused_residual == 0.0, || format!("fused crescendo residual {fused_residual:e}"))?;
    ensure(sequential_residual <= 1e-3, || format!("sequential residual {sequential_residual:e}"))?;

    let scale = |label: &str, factor: f64| {
        PotentialOperator::new(
            label,
            space.clone(),
            OperatorKind::AmplitudeScale {
                coords: vec!["loudness".into()],
                factor,
            },
        )
    };
    let (sp, spf, sf) = (scale("p", 0.5).map_err(fail)?, scale("pf", 3.2).map_err(fail)?, scale("f", 1.6).map_err(fail)?);
    let target = apply_potential(&sf, &g).map_err(fail)?;
    let scale_fused = gesture_distance(&apply_potential(&compose_vertical(&sp, &spf).map_err(fail)?, &g).map_err(fail)?, &target)
        .map_err(fail)?;
    let scale_seq =
        gesture_distance(&apply_potential(&spf, &apply_potential(&sp, &g).map_err(fail)?).map_err(fail)?, &target).map_err(fail)?;
    ensure(scale_fused == 0.0 && scale_seq == 0.0, || {
        format!("scale-only residuals {scale_fused:e}, {scale_seq:e}")
    })?;
    Ok(format!(
        "crescendo∘piano = forte: fused 0, sequential {sequential_residual:.1e}; scale-only 0"
    ))
}

fn scale_op(label: &str, space: &SpaceRef, coords: &[usize], factor: f64) -> PotentialOperator {
    let coords = coords.iter().map(|&k| space.dims()[k].name.clone()).collect();
    PotentialOperator::new(label, space.clone(), OperatorKind::AmplitudeScale { coords, factor }).unwrap()
}

fn criterion_4() -> Outcome {
    let opts = CheckOptions::default();
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let x = random_space(&mut r, "x", 3);
    let y = random_space(&mut r, "y", 3);
    let powers = [0.25, 0.5, 2.0, 4.0];

    // Diagonal map with power-of-two entries.
    let d: Vec<f64> = (0..3).map(|_| powers[r.random_range(0..4)]).collect();
    let matrix = (0..3).map(|i| (0..3).map(|j| if i == j { d[i] } else { 0.0 }).collect()).collect();
    let diag = SpaceMap::affine(x.clone(), y.clone(), matrix, vec![0.0; 3]).map_err(fail)?;
    let f1 = scale_op("f1", &x, &[0, 2], 2.0);
    let f2 = scale_op("f2", &x, &[1], 0.5);
    let g1 = scale_op("g1", &y, &[0, 2], 2.0);
    let g2 = scale_op("g2", &y, &[1], 0.5);
    let rd = interchange_check(&f1, &f2, &g1, &g2, &diag, &opts).map_err(fail)?.residual;
    ensure(rd == 0.0, || format!("diagonal residual {rd:e}"))?;

    let perm = SpaceMap::permutation(x.clone(), y.clone(), vec![2, 0, 1]).map_err(fail)?;
    let (f1, f2) = (scale_op("f1", &x, &[0], 1.6), scale_op("f2", &x, &[2], 0.6));
    let (g1, g2) = (scale_op("g1", &y, &[1], 1.6), scale_op("g2", &y, &[0], 0.6));
    let rp = interchange_check(&f1, &f2, &g1, &g2, &perm, &opts).map_err(fail)?.residual;
    ensure(rp == 0.0, || format!("permutation residual {rp:e}"))?;

    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let x = random_space(&mut r, "x", 3);
        let y = random_space(&mut r, "y", 3);
        let m = random_affine(&mut r, &x, &y);
        let mut pick = |label: &str, space: &SpaceRef| {
            let factor = r.random_range(0.4..1.8);
            let coords: Vec<usize> = (0..3).filter(|_| r.random_bool(0.5)).collect();
            let mut diag = DVector::from_element(3, 1.0);
            coords.iter().for_each(|&k| diag[k] = factor);
            (scale_op(label, space, &coords, factor), diag)
        };
        let (f1, d1) = pick("f1", &x);
        let (f2, d2) = pick("f2", &x);
        let (g1, e1) = pick("g1", &y);
        let (g2, e2) = pick("g2", &y);
        let report = interchange_check(&f1, &f2, &g1, &g2, &m, &opts).map_err(fail)?;
        let (a, b): (DMatrix<f64>, DVector<f64>) = m.as_affine().ok_or("not affine")?;
        let mut oracle: f64 = 0.0;
        for c in probe_curves(&x, None) {
            for k in 0..opts.grid {
                let p = DVector::from_vec(c.eval(grid_time(k, opts.grid)));
                let vertical = &a * d2.component_mul(&d1.component_mul(&p)) + &b;
                let horizontal = e2.component_mul(&e1.component_mul(&(&a * &p + &b)));
                let diff = vertical - horizontal;
                let norm = diff
                    .iter()
                    .zip(y.dims())
                    .map(|(v, d)| (v / d.width()).powi(2))
                    .sum::<f64>()
                    .sqrt();
                oracle = oracle.max(norm);
            }
        }
        let gap = (report.residual - oracle).abs();
        worst = worst.max(gap);
        ensure(gap <= 1e-9, || format!("instance {i}: residual {} vs oracle {oracle}", report.residual))?;
    }
    Ok(format!("diagonal 0, permutation 0, 50 affine instances within {worst:.1e} of the matrix oracle"))
}

fn criterion_5() -> Outcome {
    for (addresses, samples) in [(5usize, 33usize), (7, 65)] {
        let address_space = ConfigSpace::new("a", vec![Dimension::new("alpha", "", 0.0, 1.0)]).map_err(fail)?;
        let body = ConfigSpace::new("b", vec![Dimension::new("x", "", -1.0, 1.0), Dimension::new("y", "", -1.0, 1.0)])
            .map_err(fail)?;
        let grid = AddressGrid::uniform(0.0, 1.0, addresses).map_err(fail)?;
        let rows = (0..addresses)
            .map(|j| {
                let alpha = grid_time(j, addresses);
                (0..samples)
                    .map(|i| {
                        let t = grid_time(i, samples);
                        vec![alpha * t.cos() * 0.9, (alpha + t).sin() * 0.5]
                    })
                    .collect()
            })
            .collect();
        let q = AddressedSamples {
            address_space,
            grid,
            body_space: body,
            arrows: BTreeMap::from([("a0".to_string(), rows)]),
        };
        let back = uncurry(&curry_addressed(&q, &chain(1), Flavor::Symbolic).map_err(fail)?);
        ensure(back == q, || format!("round trip differs on {addresses}×{samples}"))?;
    }
    Ok("uncurry∘curry is the identity on 5×33 and 7×65".into())
}

fn criterion_6() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(6);
    let points: Vec<f64> = (0..50).map(|_| r.random_range(0..=64) as f64 / 64.0).collect();
    let mut triples = 0;
    for &a in &points {
        let id = NablaMorphism::identity(a).map_err(fail)?;
        for &b in points.iter().filter(|&&b| b >= a) {
            let f = NablaMorphism::new(a, b).map_err(fail)?;
            ensure(nabla_compose(id, f).map_err(fail)? == f, || format!("left identity at {a},{b}"))?;
            ensure(
                nabla_compose(f, NablaMorphism::identity(b).map_err(fail)?).map_err(fail)? == f,
                || format!("right identity at {a},{b}"),
            )?;
            for &c in points.iter().filter(|&&c| c >= b).take(8) {
                let g = NablaMorphism::new(b, c).map_err(fail)?;
                for &d in points.iter().filter(|&&d| d >= c).take(4) {
                    let h = NablaMorphism::new(c, d).map_err(fail)?;
                    let left = nabla_compose(nabla_compose(f, g).map_err(fail)?, h).map_err(fail)?;
                    let right = nabla_compose(f, nabla_compose(g, h).map_err(fail)?).map_err(fail)?;
                    ensure(left == right, || format!("associativity at {a},{b},{c},{d}"))?;
                    triples += 1;
                }
            }
            if a != b {
                let back = NablaMorphism::new(b, b).map_err(fail)?;
                ensure(nabla_compose(back, f).is_err(), || format!("{b}→{b} then {a}→{b} composed"))?;
            }
        }
    }
    Ok(format!("identity and associativity exact on {triples} composable triples"))
}

fn criterion_7() -> Outcome {
    let flags = Flags::default();
    let config = commands::load_scenario(&shipped("scenarios/trio.json"), &flags).map_err(fail)?;
    let opts = CheckOptions::measured();
    let scenario = build_orchestra_scenario(&config, &opts).map_err(fail)?;
    let report = verify_orchestra(&scenario, &opts).map_err(fail)?;
    ensure(report.cocone.valid && report.cocone.residual <= 1e-2, || format!("cocone {:?}", report.cocone))?;
    ensure(report.dual_cone.valid && report.dual_cone.residual <= 1e-2, || {
        format!("dual cone {:?}", report.dual_cone)
    })?;
    let squares = report.conductor_squares.values().map(|s| s.residual).fold(0.0, f64::max);
    ensure(squares <= 1e-2, || format!("conductor squares {squares:e}"))?;
    let universal = report.universal.as_ref().ok_or("no stage target")?;
    ensure(universal.existence && universal.unique, || format!("universal {universal:?}"))?;
    ensure(report.passed, || "report not passed".into())?;
    Ok(format!(
        "cocone {:.1e}, dual cone {:.1e}, squares {squares:.1e}, mediator {:?} unique",
        report.cocone.residual, report.dual_cone.residual, universal.mediators
    ))
}

fn criterion_8() -> Outcome {
    let report = matrix::similarity_matrix(&shipped("matrix"), &Flags::default()).map_err(fail)?;
    let mut similar = 0;
    let mut lowest = f64::INFINITY;
    for pair in &report.pairs {
        let Some(r) = &pair.report else { continue };
        if r.similar {
            let cosine = r
                .spectral_delta_cosine
                .ok_or_else(|| format!("{} / {}: no spectral cosine", pair.row, pair.col))?;
            ensure(cosine >= SPECTRAL_THRESHOLD, || format!("{} / {}: cosine {cosine}", pair.row, pair.col))?;
            lowest = lowest.min(cosine);
            similar += 1;
        }
    }
    ensure(similar > 0, || "no similar pairs in the corpus".into())?;
    let out = commands::conjecture_report(&shipped("nonsim/nonsim.json"), &Flags::default()).map_err(fail)?;
    let c = &out.conjecture;
    ensure(c.g_connectable && c.h_connectable && !c.spectrally_similar && !out.similarity.similar, || {
        format!("nonsim pair: {c:?}, similar {}", out.similarity.similar)
    })?;
    Ok(format!(
        "{similar} similar pairs, lowest cosine {lowest:.4}; nonsim pair connectable, cosine {:.3}, not similar",
        c.cosine
    ))
}

fn matrix_output(dir: &Path, extra: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_gestures"))
        .arg("matrix")
        .arg(dir)
        .args(extra)
        .output()
        .map_err(fail)?;
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    String::from_utf8(out.stdout).map_err(fail)
}

fn criterion_9() -> Outcome {
    let dir = shipped("matrix");
    for format in ["json", "csv"] {
        let runs = [
            matrix_output(&dir, &["--format", format])?,
            matrix_output(&dir, &["--format", format])?,
            matrix_output(&dir, &["--format", format, "--threads", "1"])?,
            matrix_output(&dir, &["--format", format, "--threads", "4"])?,
        ];
        ensure(runs.iter().all(|r| r == &runs[0]), || format!("{format} output differs between runs"))?;
    }
    Ok("json and csv byte-identical across reruns and 1 vs 4 threads".into())
}

fn criterion_10() -> Outcome {
    let g = corpus::keypress_step();
    let bound = 1.5;
    let smooth = performance_smooth(&g, bound, 8).map_err(fail)?;
    ensure(smooth.flavor() == Flavor::Physical, || "not physical".into())?;
    ensure(smooth.validate().is_valid(), || format!("{:?}", smooth.validate()))?;
    let mut fastest: f64 = 0.0;
    for (a, c) in smooth.arrow_curves() {
        let before = &g.arrow_curves()[a];
        fastest = fastest.max(c.max_speed());
        ensure(c.max_speed() <= bound, || format!("{a}: speed {}", c.max_speed()))?;
        let same = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits());
        ensure(same(c.start(), before.start()) && same(c.end(), before.end()), || {
            format!("{a}: endpoints moved")
        })?;
    }
    ensure(smooth.vertex_points() == g.vertex_points(), || "vertex points moved".into())?;
    Ok(format!("physical, max speed {fastest:.4} ≤ {bound}, endpoints bitwise"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("constructed morphisms and composition bound", criterion_1),
        ("similarity cases", criterion_2),
        ("crescendo composition", criterion_3),
        ("interchange", criterion_4),
        ("currying round trip", criterion_5),
        ("nabla laws", criterion_6),
        ("orchestra trio", criterion_7),
        ("spectral agreement", criterion_8),
        ("matrix determinism", criterion_9),
        ("performance smoothing", criterion_10),
    ];
    let start = Instant::now();
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    let elapsed = start.elapsed();
    println!("elapsed {:.1} s", elapsed.as_secs_f64());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
    assert!(elapsed.as_secs() < 60, "acceptance took {elapsed:?}");
}

#[test]
fn similarity_identity_case() {
    identity_case().unwrap();
}

#[test]
fn similarity_requires_generators() {
    missing_generator().unwrap();
}

#[test]
fn similarity_forte_against_piano() {
    forte_vs_piano().unwrap();
}

#[test]
fn similarity_rejects_foreign_operator() {
    space_mismatch().unwrap();
}
