use super::{design_lowpass, Recording, SignalError};
use ndarray::Array2;

const MAX_DENOMINATOR: u64 = 1024;
/// Prefilter length per polyphase branch, on each side of the centre tap.
const TAPS_PER_PHASE: usize = 16;
/// Prefilter cutoff as a fraction of the output Nyquist frequency.
const CUTOFF_FRACTION: f64 = 0.9;

/// Reduces `target / source` to `(up, down)` with `down <= 1024`.
pub fn rational_ratio(source_hz: f64, target_hz: f64) -> Result<(usize, usize), SignalError> {
    let r = target_hz / source_hz;
    if !(r.is_finite() && r > 0.0) {
        return Err(SignalError::IrrationalRatio(r));
    }
    // Continued-fraction convergents.
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut x = r;
    loop {
        let a = x.floor();
        let (p2, q2) = (a as u64 * p1 + p0, a as u64 * q1 + q0);
        if q2 > MAX_DENOMINATOR {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let approx = p1 as f64 / q1 as f64;
        if (approx - r).abs() <= 1e-9 * r {
            return Ok((p1 as usize, q1 as usize));
        }
        let frac = x - a;
        if frac == 0.0 {
            break;
        }
        x = 1.0 / frac;
    }
    Err(SignalError::IrrationalRatio(r))
}

/// Lowpass-filters and resamples to a lower rate through a polyphase
/// up-by-`p`, down-by-`q` structure with delay compensation.
pub fn decimate(rec: &Recording, target_rate_hz: f64) -> Result<Recording, SignalError> {
    let source = rec.sample_rate_hz();
    if target_rate_hz > source {
        return Err(SignalError::UpsampleRequested {
            source_hz: source,
            target_hz: target_rate_hz,
        });
    }
    if target_rate_hz == source {
        return Ok(rec.clone());
    }
    let (up, down) = rational_ratio(source, target_rate_hz)?;
    let upsampled_rate = source * up as f64;
    let num_taps = 2 * TAPS_PER_PHASE * up.max(down) + 1;
    let filt = design_lowpass(
        CUTOFF_FRACTION * target_rate_hz / 2.0,
        num_taps,
        upsampled_rate,
    )?;
    let taps = filt.taps();
    let delay = filt.group_delay_samples();
    let len = rec.len();
    let out_len = len * up / down;
    let gain = up as f64;

    let mut out = Array2::zeros((rec.channel_count(), out_len));
    for (src, mut dst) in rec.samples().rows().into_iter().zip(out.rows_mut()) {
        for (k, d) in dst.iter_mut().enumerate() {
            // Position on the zero-stuffed grid; only taps landing on a
            // multiple of `up` see a nonzero input sample.
            let centre = k * down + delay;
            let first = centre % up;
            let mut acc = 0.0;
            let mut i = first;
            while i < taps.len() && i <= centre {
                let j = (centre - i) / up;
                if j < len {
                    acc += taps[i] * src[j];
                }
                i += up;
            }
            *d = gain * acc;
        }
    }
    Recording::new(out, target_rate_hz)
}
