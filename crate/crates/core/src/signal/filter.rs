use super::{Recording, SignalError};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// FIR taps plus the delay that `apply_filter` removes from the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    taps: Vec<f64>,
    group_delay_samples: usize,
}

impl FilterSpec {
    /// Linear-phase filter: the delay is `(len - 1) / 2`.
    pub fn new(taps: Vec<f64>) -> Result<Self, SignalError> {
        if taps.is_empty() {
            return Err(SignalError::EmptyFilter);
        }
        let group_delay_samples = (taps.len() - 1) / 2;
        Ok(Self {
            taps,
            group_delay_samples,
        })
    }

    pub fn with_delay(taps: Vec<f64>, group_delay_samples: usize) -> Result<Self, SignalError> {
        if taps.is_empty() {
            return Err(SignalError::EmptyFilter);
        }
        Ok(Self {
            taps,
            group_delay_samples,
        })
    }

    pub fn identity() -> Self {
        Self {
            taps: vec![1.0],
            group_delay_samples: 0,
        }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn group_delay_samples(&self) -> usize {
        self.group_delay_samples
    }
}

/// Hamming-windowed sinc lowpass, normalized to unit DC gain.
pub fn design_lowpass(
    cutoff_hz: f64,
    num_taps: usize,
    sample_rate_hz: f64,
) -> Result<FilterSpec, SignalError> {
    let nyquist_hz = sample_rate_hz / 2.0;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyquist_hz) {
        return Err(SignalError::InvalidCutoff {
            cutoff_hz,
            nyquist_hz,
        });
    }
    if num_taps % 2 == 0 {
        return Err(SignalError::EvenTapCount(num_taps));
    }
    let half = (num_taps - 1) / 2;
    let fc = cutoff_hz / sample_rate_hz;
    // Evaluated on |offset| so mirrored taps are bit-identical.
    let tap = |k: usize| -> f64 {
        let window = if half == 0 {
            1.0
        } else {
            0.54 + 0.46 * (PI * k as f64 / half as f64).cos()
        };
        let x = 2.0 * fc * k as f64;
        let sinc = if k == 0 { 1.0 } else { (PI * x).sin() / (PI * x) };
        2.0 * fc * sinc * window
    };
    let raw: Vec<f64> = (0..num_taps).map(|i| tap(i.abs_diff(half))).collect();
    let gain: f64 = raw.iter().sum();
    FilterSpec::new(raw.into_iter().map(|t| t / gain).collect())
}

/// Convolves every channel with the taps, then advances the result by the
/// filter's group delay so features stay time-aligned. Output length equals
/// input length; samples outside the recording are treated as zero.
pub fn apply_filter(rec: &Recording, filt: &FilterSpec) -> Result<Recording, SignalError> {
    let taps = filt.taps();
    let len = rec.len();
    if len <= taps.len() {
        return Err(SignalError::SignalTooShort {
            len,
            taps: taps.len(),
        });
    }
    let delay = filt.group_delay_samples() as isize;
    let mut out = Array2::zeros(rec.samples().dim());
    for (src, mut dst) in rec.samples().rows().into_iter().zip(out.rows_mut()) {
        for (n, d) in dst.iter_mut().enumerate() {
            let centre = n as isize + delay;
            let mut acc = 0.0;
            for (i, &h) in taps.iter().enumerate() {
                let j = centre - i as isize;
                if j >= 0 && (j as usize) < len {
                    acc += h * src[j as usize];
                }
            }
            *d = acc;
        }
    }
    Recording::new(out, rec.sample_rate_hz())
}
