use super::synth::segment_noise_seed;
use super::HarnessError;
use crate::signal::io::{read_raw, write_raw, Sidecar};
use crate::signal::{add_noise, decimate, segment, NoiseSpec, Recording};
use ndarray::{concatenate, Array2, Axis};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const MANIFEST: &str = "dataset.json";

/// One continuous recording per class; consecutive segments are adjacent in
/// time.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub recordings: Vec<Recording>,
    pub class_names: Vec<String>,
    pub segment_len_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    segment_len_s: f64,
    classes: Vec<ManifestClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestClass {
    name: String,
    file: String,
}

/// Segments of every class, ids class-major and in temporal order within a
/// class.
#[derive(Debug, Clone, PartialEq)]
pub struct Segments {
    pub segments: Vec<Array2<f64>>,
    pub labels: Vec<usize>,
    pub sample_rate_hz: f64,
    pub class_names: Vec<String>,
}

impl Segments {
    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    /// Ids of each class in temporal order.
    pub fn ids_by_class(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.class_count()];
        for (id, &label) in self.labels.iter().enumerate() {
            out[label].push(id);
        }
        out
    }
}

impl Corpus {
    pub fn class_count(&self) -> usize {
        self.recordings.len()
    }

    pub fn segments(&self) -> Result<Segments, HarnessError> {
        let mut segments = Vec::new();
        let mut labels = Vec::new();
        for (class, rec) in self.recordings.iter().enumerate() {
            let set = segment(rec, self.segment_len_s)?;
            labels.extend(std::iter::repeat_n(class, set.len()));
            segments.extend(set.into_segments());
        }
        let sample_rate_hz = self.recordings.first().map_or(0.0, Recording::sample_rate_hz);
        if self.recordings.iter().any(|r| r.sample_rate_hz() != sample_rate_hz) {
            return Err(HarnessError::Data("classes disagree on the sample rate".into()));
        }
        Ok(Segments { segments, labels, sample_rate_hz, class_names: self.class_names.clone() })
    }

    /// Writes `dataset.json` and one raw little-endian f32 file (with JSON
    /// sidecar) per class.
    pub fn write_dir(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let mut classes = Vec::new();
        for (class, (rec, name)) in self.recordings.iter().zip(&self.class_names).enumerate() {
            let file = format!("class_{class}.bin");
            let sidecar = Sidecar {
                sample_rate_hz: rec.sample_rate_hz(),
                channels: Some(rec.channel_count()),
                extra: serde_json::Map::new(),
            };
            write_raw(&dir.join(&file), rec, &sidecar)?;
            classes.push(ManifestClass { name: name.clone(), file });
        }
        let manifest = Manifest { segment_len_s: self.segment_len_s, classes };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(dir.join(MANIFEST), text).map_err(|e| HarnessError::io(dir, e))
    }

    pub fn read_dir(dir: &Path) -> Result<Self, HarnessError> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
        let mut recordings = Vec::new();
        let mut class_names = Vec::new();
        for c in manifest.classes {
            recordings.push(read_raw(&dir.join(&c.file))?.0);
            class_names.push(c.name);
        }
        if recordings.len() < 2 {
            return Err(HarnessError::Data(format!("{} lists fewer than 2 classes", path.display())));
        }
        Ok(Self { recordings, class_names, segment_len_s: manifest.segment_len_s })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PreprocessSpec {
    /// Target rate for anti-aliased decimation.
    pub target_rate_hz: Option<f64>,
    /// Per-segment white-noise corruption.
    pub snr_db: Option<f64>,
    pub seed: u64,
}

/// Decimates each class recording, then corrupts every segment on its own.
pub fn preprocess(corpus: &Corpus, spec: &PreprocessSpec) -> Result<Corpus, HarnessError> {
    let mut recordings = Vec::with_capacity(corpus.recordings.len());
    for (class, rec) in corpus.recordings.iter().enumerate() {
        let rec = match spec.target_rate_hz {
            Some(fs) if fs != rec.sample_rate_hz() => decimate(rec, fs)?,
            _ => rec.clone(),
        };
        let rec = match spec.snr_db {
            None => rec,
            Some(snr_db) => {
                let fs = rec.sample_rate_hz();
                let set = segment(&rec, corpus.segment_len_s)?;
                let noisy = set
                    .segments()
                    .iter()
                    .enumerate()
                    .map(|(p, seg)| {
                        let clean = Recording::new(seg.clone(), fs)?;
                        let noise = NoiseSpec { snr_db, seed: segment_noise_seed(spec.seed, class, p) };
                        Ok(add_noise(&clean, &noise)?.into_samples())
                    })
                    .collect::<Result<Vec<_>, HarnessError>>()?;
                let views: Vec<_> = noisy.iter().map(|a| a.view()).collect();
                Recording::new(concatenate(Axis(1), &views).expect("equal segment shapes"), fs)?
            }
        };
        recordings.push(rec);
    }
    Ok(Corpus { recordings, class_names: corpus.class_names.clone(), segment_len_s: corpus.segment_len_s })
}
