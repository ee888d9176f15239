//! The standard probe set: deterministic pseudo-random smooth curves used to
//! measure residuals of operator squares.
//!
//! The generator is a 64-bit linear congruential generator
//! `s ← s·6364136223846793005 + 1442695040888963407 (mod 2⁶⁴)` seeded with the
//! FNV-1a hash of a label (the space name unless overridden). Each draw takes
//! the top 53 bits of the new state as a uniform number in `[0, 1)`.
//!
//! Every coordinate of a probe is
//! `min + width·(c + a₁·sin(2π f₁ t + φ₁) + a₂·sin(2π f₂ t + φ₂))` with
//! `c ∈ [0.3, 0.7)`, `a₁ ∈ [0, 0.2)`, `a₂ ∈ [0, 0.1)`, `f₁ ∈ {1,2,3}`,
//! `f₂ ∈ {2,…,5}`, `φ ∈ [0, 2π)`, drawn in that order, so probes stay inside
//! the normalization box.

use std::f64::consts::TAU;

use super::curve::{Continuity, Curve};
use super::space::SpaceRef;

pub const PROBE_COUNT: usize = 32;
pub const PROBE_SAMPLES: usize = 65;

const LCG_MULTIPLIER: u64 = 6364136223846793005;
const LCG_INCREMENT: u64 = 1442695040888963407;

/// FNV-1a, 64 bit.
pub fn fnv1a64(label: &str) -> u64 {
    label.bytes().fold(0xcbf29ce484222325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100000001b3)
    })
}

#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn from_label(label: &str) -> Self {
        Self { state: fnv1a64(label) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(LCG_MULTIPLIER)
            .wrapping_add(LCG_INCREMENT);
        self.state
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// The probe set for `space`, seeded by `label` or by the space name.
pub fn probe_curves(space: &SpaceRef, label: Option<&str>) -> Vec<Curve> {
    let mut rng = Lcg64::from_label(label.unwrap_or(space.name()));
    (0..PROBE_COUNT)
        .map(|_| {
            let params: Vec<[f64; 7]> = space
                .dims()
                .iter()
                .map(|_| {
                    let c = 0.3 + 0.4 * rng.next_f64();
                    let a1 = 0.2 * rng.next_f64();
                    let a2 = 0.1 * rng.next_f64();
                    let f1 = 1.0 + (3.0 * rng.next_f64()).floor();
                    let f2 = 2.0 + (4.0 * rng.next_f64()).floor();
                    let p1 = TAU * rng.next_f64();
                    let p2 = TAU * rng.next_f64();
                    [c, a1, a2, f1, f2, p1, p2]
                })
                .collect();
            Curve::from_fn(
                space.clone(),
                PROBE_SAMPLES,
                Continuity::Continuous { speed_bound: None },
                |t| {
                    space
                        .dims()
                        .iter()
                        .zip(&params)
                        .map(|(d, [c, a1, a2, f1, f2, p1, p2])| {
                            let u = c + a1 * (TAU * f1 * t + p1).sin() + a2 * (TAU * f2 * t + p2).sin();
                            d.min + d.width() * u
                        })
                        .collect()
                },
            )
            .expect("probe samples are finite")
        })
        .collect()
}
