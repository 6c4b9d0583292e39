use super::{energy, Recording, SignalError};
use ndarray::{Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// White Gaussian noise at a target SNR, fully determined by `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

/// Scale applied to a noise draw so that `signal_energy / (factor² · noise_energy)`
/// equals the requested SNR.
pub fn noise_factor(signal_energy: f64, noise_energy: f64, snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 20.0) * (signal_energy / noise_energy).sqrt()
}

/// Corrupts every channel with seeded white Gaussian noise.
///
/// The factor is computed from the realized energy of the draw, so the output
/// SNR matches `spec.snr_db` up to round-off.
pub fn add_noise(clean: &Recording, spec: &NoiseSpec) -> Result<Recording, SignalError> {
    if !spec.snr_db.is_finite() {
        return Err(SignalError::NonFiniteSnr(spec.snr_db));
    }
    let (q, len) = clean.samples().dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Array2::zeros((q, len));
    for (ch, (src, mut dst)) in clean
        .samples()
        .rows()
        .into_iter()
        .zip(out.rows_mut())
        .enumerate()
    {
        let signal_energy = energy(src);
        if signal_energy == 0.0 {
            return Err(SignalError::ZeroSignalEnergy(ch));
        }
        let eta: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
        let noise_energy = energy(ArrayView1::from(&eta));
        if noise_energy == 0.0 {
            return Err(SignalError::ZeroNoiseEnergy(ch));
        }
        let alpha = noise_factor(signal_energy, noise_energy, spec.snr_db);
        for ((d, s), e) in dst.iter_mut().zip(src.iter()).zip(&eta) {
            *d = s + alpha * e;
        }
    }
    Recording::new(out, clean.sample_rate_hz())
}

/// Per-channel SNR of `noisy` against its clean reference, in dB.
pub fn realized_snr_db(clean: &Recording, noisy: &Recording) -> Vec<f64> {
    clean
        .samples()
        .rows()
        .into_iter()
        .zip(noisy.samples().rows())
        .map(|(c, n)| {
            let noise: f64 = c.iter().zip(n.iter()).map(|(a, b)| (b - a) * (b - a)).sum();
            10.0 * (energy(c) / noise).log10()
        })
        .collect()
}
