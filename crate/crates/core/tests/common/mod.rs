#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use gesture_core::curvespace::{grid_time, ConfigSpace, Continuity, Curve, Dimension, SpaceMap, SpaceRef};
use gesture_core::gesture::{Flavor, Gesture};
use gesture_core::skeleton::{chain, Digraph, DigraphMorphism};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_space(rng: &mut ChaCha8Rng, name: &str, dim: usize) -> SpaceRef {
    let dims = (0..dim)
        .map(|k| {
            let min = rng.random_range(-50.0..50.0);
            let width = rng.random_range(0.5..100.0);
            Dimension::new(format!("c{k}"), "", min, min + width)
        })
        .collect();
    ConfigSpace::new(name, dims).unwrap()
}

pub fn unit_space(name: &str, names: &[&str]) -> SpaceRef {
    ConfigSpace::new(name, names.iter().map(|n| Dimension::new(*n, "", 0.0, 1.0)).collect()).unwrap()
}

/// Smooth curve inside the box: a centre plus two sines per coordinate.
pub fn random_curve(rng: &mut ChaCha8Rng, space: &SpaceRef, n: usize) -> Curve {
    let params: Vec<[f64; 5]> = space
        .dims()
        .iter()
        .map(|_| {
            [
                rng.random_range(0.3..0.7),
                rng.random_range(0.0..0.15),
                rng.random_range(0.0..0.1),
                rng.random_range(1.0..3.0),
                rng.random_range(0.0..TAU),
            ]
        })
        .collect();
    Curve::from_fn(space.clone(), n, Continuity::PiecewiseWithJumps, |t| {
        space
            .dims()
            .iter()
            .zip(&params)
            .map(|(d, [c, a, b, f, p])| {
                let u = c + a * (TAU * f * t + p).sin() + b * (TAU * 2.0 * f * t).cos();
                d.min + u * d.width()
            })
            .collect()
    })
    .unwrap()
}

/// A chain gesture whose consecutive curves share endpoints exactly.
pub fn random_gesture(rng: &mut ChaCha8Rng, space: &SpaceRef, arrows: usize, n: usize) -> Gesture {
    let mut curves = BTreeMap::new();
    let mut previous_end: Option<Vec<f64>> = None;
    for i in 0..arrows {
        let c = random_curve(rng, space, n);
        let mut samples = c.samples().to_vec();
        if let Some(end) = previous_end.take() {
            samples[0] = end;
        }
        previous_end = Some(samples[n - 1].clone());
        curves.insert(
            format!("a{i}"),
            Curve::new(space.clone(), samples, Continuity::PiecewiseWithJumps).unwrap(),
        );
    }
    Gesture::from_curves(chain(arrows), space.clone(), curves, Flavor::Symbolic).unwrap()
}

pub fn random_affine(rng: &mut ChaCha8Rng, source: &SpaceRef, target: &SpaceRef) -> SpaceMap {
    let matrix = (0..target.dim())
        .map(|i| {
            (0..source.dim())
                .map(|j| {
                    let scale = target.dims()[i].width() / source.dims()[j].width();
                    let diagonal = if i == j { 1.0 } else { 0.0 };
                    scale * (diagonal + rng.random_range(-0.5..0.5))
                })
                .collect()
        })
        .collect();
    let offset = target.dims().iter().map(|d| rng.random_range(-0.1..0.1) * d.width()).collect();
    SpaceMap::affine(source.clone(), target.clone(), matrix, offset).unwrap()
}

/// Renames every vertex and arrow id; returns the copy and the isomorphism.
pub fn relabel(d: &Digraph, prefix: &str) -> (Digraph, DigraphMorphism) {
    let vmap: BTreeMap<String, String> = d.vertices().map(|v| (v.to_string(), format!("{prefix}{v}"))).collect();
    let amap: BTreeMap<String, String> = d.arrows().map(|(a, _)| (a.to_string(), format!("{prefix}{a}"))).collect();
    let arrows = d
        .arrows()
        .map(|(a, inc)| (amap[a].clone(), vmap[&inc.tail].clone(), vmap[&inc.head].clone()));
    let copy = Digraph::new(vmap.values().cloned(), arrows).unwrap();
    let t = DigraphMorphism::new(d.clone(), copy.clone(), vmap, amap).unwrap();
    (copy, t)
}

/// Moves a gesture onto a relabeled skeleton along `t`.
pub fn transport(g: &Gesture, t: &DigraphMorphism) -> Gesture {
    let curves = g
        .arrow_curves()
        .iter()
        .map(|(a, c)| (t.map_arrow(a).unwrap().to_string(), c.clone()))
        .collect();
    Gesture::from_curves(t.target().clone(), g.space().clone(), curves, g.flavor()).unwrap()
}

/// Adds `delta` (normalized) to coordinate `k` of interior samples.
pub fn perturb_interior(g: &Gesture, delta: f64, k: usize) -> Gesture {
    let width = g.space().dims()[k].width();
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
                        q[k] += delta * width * (std::f64::consts::PI * grid_time(i, n)).sin();
                    }
                    q
                })
                .collect();
            (a.clone(), Curve::new(g.space().clone(), samples, c.continuity()).unwrap())
        })
        .collect();
    Gesture::new(g.skeleton().clone(), g.space().clone(), g.vertex_points().clone(), curves, g.flavor()).unwrap()
}

/// Independent piecewise-linear evaluation of raw samples.
pub fn eval_samples(samples: &[Vec<f64>], t: f64) -> Vec<f64> {
    let n = samples.len();
    let pos = (t.clamp(0.0, 1.0)) * (n - 1) as f64;
    let k = (pos.floor() as usize).min(n - 2);
    let s = pos - k as f64;
    samples[k].iter().zip(&samples[k + 1]).map(|(a, b)| a * (1.0 - s) + b * s).collect()
}

pub fn normalized_norm(space: &SpaceRef, v: &[f64]) -> f64 {
    v.iter()
        .zip(space.dims())
        .map(|(x, d)| (x / d.width()).powi(2))
        .sum::<f64>()
        .sqrt()
}
