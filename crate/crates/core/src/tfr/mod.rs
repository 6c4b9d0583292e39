//! Quadratic time-frequency representations built from the analytic signal:
//! the Wigner-Ville distribution and its compact-kernel smoothed form.
//!
//! Discretization: the instantaneous autocorrelation uses integer shifts,
//! `K[n, m] = z[n + m] · conj(z[n − m])`, so lag index `m` corresponds to an
//! effective lag of `2m` samples and the frequency axis has `n_fft` bins
//! spanning `[0, fs/2)`. Samples outside the segment are zero. Segments are
//! zero-padded to the next power of two and the time axis is cropped back
//! afterwards. Published CKD implementations that use a different lag
//! convention will differ in scale and frequency-axis mapping.

mod ambiguity;
mod analytic;
mod ckd;
mod downsample;
mod kernel;

pub use ambiguity::{ambiguity_function, instantaneous_autocorrelation, AmbiguityFunction};
pub use analytic::{analytic_segment, analytic_signal, AnalyticSegment};
pub use ckd::{compute_ckd_tfr, distribution, wvd, SmoothingKernel};
pub use downsample::{downsample_tfr, output_side};
pub use kernel::{ckd_kernel, compact_window, normalized_grid};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TfrError {
    #[error("segment length {0} is too short for a time-frequency transform")]
    DegenerateLength(usize),
    #[error("invalid kernel parameters: {0}")]
    InvalidParams(String),
    #[error("downsampling factor {factor} gives side {side} (< 2)")]
    FactorTooSmall { factor: f64, side: usize },
    #[error("channel shapes differ")]
    ShapeMismatch,
}

/// Shape and cutoffs of the separable compact-support kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CkdParams {
    pub c: f64,
    pub d_cutoff: f64,
    pub e_cutoff: f64,
}

impl Default for CkdParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            d_cutoff: 0.1,
            e_cutoff: 0.1,
        }
    }
}

impl CkdParams {
    pub fn validate(&self) -> Result<(), TfrError> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(TfrError::InvalidParams(format!("c must be > 0, got {}", self.c)));
        }
        for (name, v) in [("d_cutoff", self.d_cutoff), ("e_cutoff", self.e_cutoff)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(TfrError::InvalidParams(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfrConfig {
    /// Fraction of the segment length kept on each side of the output matrix.
    pub downsample_factor: f64,
    pub ckd: CkdParams,
}

impl Default for TfrConfig {
    fn default() -> Self {
        Self {
            downsample_factor: 0.064,
            ckd: CkdParams::default(),
        }
    }
}

/// One real `time × frequency` matrix per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Tfr {
    pub values: Vec<Array2<f64>>,
    pub time_step_s: f64,
    pub freq_step_hz: f64,
}

impl Tfr {
    pub fn shape(&self) -> (usize, usize) {
        self.values.first().map_or((0, 0), |v| v.dim())
    }

    pub fn channel_count(&self) -> usize {
        self.values.len()
    }

    /// `Σ ℓ · Δt · Δf` for one channel.
    pub fn energy(&self, channel: usize) -> f64 {
        self.values[channel].sum() * self.time_step_s * self.freq_step_hz
    }

    /// Per-row argmax over frequency for one channel.
    pub fn ridge(&self, channel: usize) -> Vec<usize> {
        self.values[channel]
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
                    .0
            })
            .collect()
    }

    /// Flattens all channels row-major into one feature vector.
    pub fn flatten(&self) -> Vec<f64> {
        self.values.iter().flat_map(|m| m.iter().copied()).collect()
    }
}
