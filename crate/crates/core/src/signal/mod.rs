//! Time-domain preprocessing: noise corruption, FIR filtering, rational
//! decimation and non-overlapping segmentation of multichannel recordings.
//!
//! All signals are held as `f64` regardless of how they were ingested.

mod filter;
pub mod io;
mod noise;
mod resample;
mod segment;

pub use filter::{apply_filter, design_lowpass, FilterSpec};
pub use noise::{add_noise, noise_factor, realized_snr_db, NoiseSpec};
pub use resample::{decimate, rational_ratio};
pub use segment::{samples_per_segment, segment, SegmentSet};

use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("channel {0} has zero energy")]
    ZeroSignalEnergy(usize),
    #[error("drawn noise has zero energy on channel {0}")]
    ZeroNoiseEnergy(usize),
    #[error("snr must be finite, got {0}")]
    NonFiniteSnr(f64),
    #[error("signal of length {len} is too short for a {taps}-tap filter")]
    SignalTooShort { len: usize, taps: usize },
    #[error("cutoff {cutoff_hz} Hz must lie in (0, {nyquist_hz}) Hz")]
    InvalidCutoff { cutoff_hz: f64, nyquist_hz: f64 },
    #[error("tap count must be odd, got {0}")]
    EvenTapCount(usize),
    #[error("filter has no taps")]
    EmptyFilter,
    #[error("target rate {target_hz} Hz exceeds source rate {source_hz} Hz")]
    UpsampleRequested { source_hz: f64, target_hz: f64 },
    #[error("rate ratio {0} is not a small rational")]
    IrrationalRatio(f64),
    #[error("segment of {segment_len_s} s is longer than the recording ({duration_s} s)")]
    SegmentTooLong { segment_len_s: f64, duration_s: f64 },
    #[error("segment length {0} s does not map to a whole number (>= 2) of samples")]
    FractionalSegment(f64),
    #[error("invalid recording: {0}")]
    InvalidRecording(String),
    #[error("ingest failed: {0}")]
    Ingest(String),
}

/// A multichannel recording, stored channel-major (`channels × samples`).
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    samples: Array2<f64>,
    sample_rate_hz: f64,
}

impl Recording {
    pub fn new(samples: Array2<f64>, sample_rate_hz: f64) -> Result<Self, SignalError> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(SignalError::InvalidRecording(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if samples.nrows() == 0 {
            return Err(SignalError::InvalidRecording("no channels".into()));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    /// Builds a recording from per-channel vectors, which must share a length.
    pub fn from_channels(channels: Vec<Vec<f64>>, sample_rate_hz: f64) -> Result<Self, SignalError> {
        let q = channels.len();
        let len = channels.first().map_or(0, Vec::len);
        if channels.iter().any(|c| c.len() != len) {
            return Err(SignalError::InvalidRecording(
                "channels differ in length".into(),
            ));
        }
        let flat: Vec<f64> = channels.into_iter().flatten().collect();
        let samples = Array2::from_shape_vec((q, len), flat)
            .map_err(|e| SignalError::InvalidRecording(e.to_string()))?;
        Self::new(samples, sample_rate_hz)
    }

    pub fn samples(&self) -> &Array2<f64> {
        &self.samples
    }

    pub fn into_samples(self) -> Array2<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn channel_count(&self) -> usize {
        self.samples.nrows()
    }

    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.ncols() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz
    }
}

pub(crate) fn energy(x: ndarray::ArrayView1<'_, f64>) -> f64 {
    x.iter().map(|v| v * v).sum()
}
