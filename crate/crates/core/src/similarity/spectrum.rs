use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gesture::Gesture;

pub const SAMPLE_RATE: f64 = 8000.0;
pub const CARRIER_HZ: f64 = 440.0;

/// Which coordinate drives the amplitude envelope, and how long each arrow
/// sounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisMapping {
    pub amplitude: String,
    pub seconds_per_arrow: f64,
}

impl SynthesisMapping {
    pub fn new(amplitude: impl Into<String>) -> Self {
        Self {
            amplitude: amplitude.into(),
            seconds_per_arrow: 1.0,
        }
    }

    pub fn with_seconds(mut self, seconds: f64) -> Self {
        self.seconds_per_arrow = seconds;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralFeatures {
    pub rms_loudness: f64,
    /// Hz; zero for silence.
    pub spectral_centroid: f64,
    /// Seconds.
    pub duration: f64,
}

impl SpectralFeatures {
    pub fn to_vec(self) -> [f64; 3] {
        [self.rms_loudness, self.spectral_centroid, self.duration]
    }
}

/// The carrier under the amplitude envelope, arrows played in id order.
pub fn synthesize(g: &Gesture, mapping: &SynthesisMapping) -> Result<Vec<f64>> {
    let k = g
        .space()
        .coordinate(&mapping.amplitude)
        .ok_or_else(|| Error::MissingCoordinate(format!("{}` in space `{}", mapping.amplitude, g.space().name())))?;
    if !(mapping.seconds_per_arrow.is_finite() && mapping.seconds_per_arrow > 0.0) {
        return Err(Error::ConfigInvalid("seconds per arrow must be positive".into()));
    }
    let per_arrow = ((mapping.seconds_per_arrow * SAMPLE_RATE).round() as usize).max(2);
    let mut buffer = Vec::with_capacity(per_arrow * g.arrow_curves().len());
    for c in g.arrow_curves().values() {
        for n in 0..per_arrow {
            let t = n as f64 / (per_arrow - 1) as f64;
            let envelope = c.eval(t)[k];
            let phase = 2.0 * PI * CARRIER_HZ * buffer.len() as f64 / SAMPLE_RATE;
            buffer.push(envelope * phase.sin());
        }
    }
    Ok(buffer)
}

/// Magnitude-weighted mean frequency of the one-sided spectrum.
pub fn spectral_centroid(buffer: &[f64], sample_rate: f64) -> f64 {
    let n = buffer.len();
    if n == 0 {
        return 0.0;
    }
    let mut spectrum: Vec<Complex<f64>> = buffer.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut spectrum);
    let (mut weighted, mut total) = (0.0, 0.0);
    for (k, z) in spectrum.iter().take(n / 2 + 1).enumerate() {
        let magnitude = z.norm();
        weighted += k as f64 * sample_rate / n as f64 * magnitude;
        total += magnitude;
    }
    if total > 0.0 {
        weighted / total
    } else {
        0.0
    }
}

pub fn render_spectrum(g: &Gesture, mapping: &SynthesisMapping) -> Result<SpectralFeatures> {
    let buffer = synthesize(g, mapping)?;
    let rms = if buffer.is_empty() {
        0.0
    } else {
        (buffer.iter().map(|x| x * x).sum::<f64>() / buffer.len() as f64).sqrt()
    };
    Ok(SpectralFeatures {
        rms_loudness: rms,
        spectral_centroid: spectral_centroid(&buffer, SAMPLE_RATE),
        duration: buffer.len() as f64 / SAMPLE_RATE,
    })
}
