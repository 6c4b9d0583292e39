//! Seeded synthetic stand-in for a multi-class vibration corpus.

use super::{Corpus, HarnessError};
use crate::signal::{add_noise, samples_per_segment, NoiseSpec, Recording};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Waveform family of one class. Frequencies are in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClassDef {
    /// Linear sweep from `start_hz` to `end_hz` across the segment.
    Chirp { start_hz: f64, end_hz: f64 },
    /// Carrier with sinusoidal amplitude modulation.
    AmTone { carrier_hz: f64, modulation_hz: f64, depth: f64 },
    /// Sum of random in-band sinusoids under a Gaussian envelope.
    Burst { center_hz: f64, bandwidth_hz: f64, components: usize },
}

impl ClassDef {
    pub fn name(&self) -> String {
        match self {
            ClassDef::Chirp { start_hz, end_hz } if end_hz >= start_hz => "up_chirp".into(),
            ClassDef::Chirp { .. } => "down_chirp".into(),
            ClassDef::AmTone { .. } => "am_tone".into(),
            ClassDef::Burst { .. } => "burst".into(),
        }
    }

    fn scaled(&self, s: f64) -> Self {
        match *self {
            ClassDef::Chirp { start_hz, end_hz } => ClassDef::Chirp { start_hz: start_hz * s, end_hz: end_hz * s },
            ClassDef::AmTone { carrier_hz, modulation_hz, depth } => ClassDef::AmTone {
                carrier_hz: carrier_hz * s,
                modulation_hz,
                depth,
            },
            ClassDef::Burst { center_hz, bandwidth_hz, components } => ClassDef::Burst {
                center_hz: center_hz * s,
                bandwidth_hz,
                components,
            },
        }
    }

    fn max_hz(&self) -> f64 {
        match *self {
            ClassDef::Chirp { start_hz, end_hz } => start_hz.max(end_hz),
            ClassDef::AmTone { carrier_hz, modulation_hz, .. } => carrier_hz + modulation_hz,
            ClassDef::Burst { center_hz, bandwidth_hz, .. } => center_hz + bandwidth_hz / 2.0,
        }
    }

    fn render(&self, out: &mut [f64], fs: f64, rng: &mut ChaCha8Rng) {
        let len = out.len();
        let duration = len as f64 / fs;
        match *self {
            ClassDef::Chirp { start_hz, end_hz } => {
                let phase0 = rng.random_range(0.0..2.0 * PI);
                let rate = (end_hz - start_hz) / duration;
                for (i, v) in out.iter_mut().enumerate() {
                    let t = i as f64 / fs;
                    *v = (phase0 + 2.0 * PI * (start_hz * t + 0.5 * rate * t * t)).sin();
                }
            }
            ClassDef::AmTone { carrier_hz, modulation_hz, depth } => {
                let (pc, pm) = (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
                for (i, v) in out.iter_mut().enumerate() {
                    let t = i as f64 / fs;
                    let envelope = 1.0 + depth * (2.0 * PI * modulation_hz * t + pm).sin();
                    *v = envelope * (2.0 * PI * carrier_hz * t + pc).sin();
                }
            }
            ClassDef::Burst { center_hz, bandwidth_hz, components } => {
                let centre = rng.random_range(0.3..0.7) * duration;
                let width = 0.15 * duration;
                let tones: Vec<(f64, f64)> = (0..components.max(1))
                    .map(|_| {
                        let f = center_hz + bandwidth_hz * rng.random_range(-0.5..0.5);
                        (f, rng.random_range(0.0..2.0 * PI))
                    })
                    .collect();
                let norm = (tones.len() as f64).sqrt();
                for (i, v) in out.iter_mut().enumerate() {
                    let t = i as f64 / fs;
                    let envelope = (-0.5 * ((t - centre) / width).powi(2)).exp();
                    let carrier: f64 = tones.iter().map(|&(f, p)| (2.0 * PI * f * t + p).sin()).sum();
                    *v = 2.0 * envelope * carrier / norm;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub segments_per_class: usize,
    pub segment_len_s: f64,
    pub sample_rate_hz: f64,
    /// `None` is the clean condition.
    pub snr_db: Option<f64>,
    /// Relative per-segment jitter of every frequency, uniform in `±jitter`.
    pub jitter: f64,
    /// Relative frequency drift accumulated from the first to the last
    /// segment of each class.
    pub drift: f64,
    pub classes: Vec<ClassDef>,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            segments_per_class: 400,
            segment_len_s: 0.256,
            sample_rate_hz: 1000.0,
            snr_db: None,
            jitter: 0.1,
            drift: 0.3,
            classes: vec![
                ClassDef::Chirp { start_hz: 60.0, end_hz: 220.0 },
                ClassDef::Chirp { start_hz: 220.0, end_hz: 60.0 },
                ClassDef::AmTone { carrier_hz: 140.0, modulation_hz: 12.0, depth: 0.8 },
                ClassDef::Burst { center_hz: 150.0, bandwidth_hz: 120.0, components: 12 },
            ],
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn validate(&self) -> Result<usize, HarnessError> {
        let invalid = |m: String| Err(HarnessError::InvalidSpec(m));
        if self.classes.len() < 2 {
            return invalid(format!("need at least 2 classes, got {}", self.classes.len()));
        }
        for (i, a) in self.classes.iter().enumerate() {
            if self.classes[..i].contains(a) {
                return invalid(format!("class {i} duplicates an earlier class"));
            }
        }
        if self.segments_per_class == 0 {
            return invalid("segments_per_class must be positive".into());
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return invalid(format!("bad sample rate {}", self.sample_rate_hz));
        }
        let Some(width) = samples_per_segment(self.segment_len_s, self.sample_rate_hz) else {
            return invalid(format!(
                "segment length {} s is not a whole number of samples at {} Hz",
                self.segment_len_s, self.sample_rate_hz
            ));
        };
        if !(0.0..1.0).contains(&self.jitter) || !(0.0..1.0).contains(&self.drift) {
            return invalid("jitter and drift must lie in [0, 1)".into());
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return invalid(format!("snr_db must be finite, got {snr}"));
            }
        }
        let headroom = (1.0 + self.jitter) * (1.0 + self.drift);
        for c in &self.classes {
            if c.max_hz() * headroom >= self.sample_rate_hz / 2.0 {
                return invalid(format!("{} can exceed the Nyquist frequency", c.name()));
            }
        }
        Ok(width)
    }
}

pub(crate) fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Noise seed of segment `index` of class `class`.
pub fn segment_noise_seed(seed: u64, class: usize, index: usize) -> u64 {
    mix_seed(seed ^ 0x5EED_0F_4015E, class as u64 + 1, index as u64)
}

/// Renders every class. With `snr_db` set, each segment is corrupted on its
/// own so that its realized SNR hits the target.
pub fn synth_dataset(spec: &SynthSpec) -> Result<Corpus, HarnessError> {
    let width = spec.validate()?;
    let per_class = spec.segments_per_class;
    let recordings = spec
        .classes
        .iter()
        .enumerate()
        .map(|(class, def)| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, class as u64, 0));
            let mut samples = Array2::zeros((1, per_class * width));
            for p in 0..per_class {
                let tau = if per_class > 1 { p as f64 / (per_class - 1) as f64 } else { 0.0 };
                let scale = (1.0 + spec.drift * tau) * (1.0 + spec.jitter * rng.random_range(-1.0..1.0));
                let mut seg = vec![0.0; width];
                def.scaled(scale).render(&mut seg, spec.sample_rate_hz, &mut rng);
                if let Some(snr_db) = spec.snr_db {
                    let clean = Recording::new(Array2::from_shape_vec((1, width), seg).expect("one row of width samples"), spec.sample_rate_hz)?;
                    let noise = NoiseSpec { snr_db, seed: segment_noise_seed(spec.seed, class, p) };
                    seg = add_noise(&clean, &noise)?.into_samples().into_raw_vec_and_offset().0;
                }
                samples
                    .slice_mut(ndarray::s![0, p * width..(p + 1) * width])
                    .assign(&ndarray::ArrayView1::from(&seg));
            }
            Ok(Recording::new(samples, spec.sample_rate_hz)?)
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(Corpus {
        recordings,
        class_names: spec.classes.iter().map(ClassDef::name).collect(),
        segment_len_s: spec.segment_len_s,
    })
}
