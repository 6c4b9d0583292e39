use super::ambiguity::{ambiguity_function, instantaneous_autocorrelation};
use super::analytic::{analytic_segment, fft_in_place};
use super::{ckd_kernel, downsample_tfr, normalized_grid, CkdParams, Tfr, TfrConfig, TfrError};
use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothingKernel {
    /// No smoothing: the Wigner-Ville distribution.
    Identity,
    CompactSupport(CkdParams),
}

/// Complex `time × frequency` distribution of an analytic signal, before the
/// real-part cast. Rows are cropped to `z.len()`; there are `n_fft` frequency
/// bins covering `[0, fs/2)`.
///
/// Scaled so that the sum over all cells times `Δt·Δf` (with
/// `Δt = 1/fs`, `Δf = fs / (2·n_fft)`) equals the kernel-weighted `A(0, 0)`.
pub fn distribution(z: &[Complex64], kernel: &SmoothingKernel) -> Result<Array2<Complex64>, TfrError> {
    let len = z.len();
    if len < 4 {
        return Err(TfrError::DegenerateLength(len));
    }
    let n_fft = len.next_power_of_two();

    let lag_major = match kernel {
        SmoothingKernel::Identity => instantaneous_autocorrelation(z, n_fft),
        SmoothingKernel::CompactSupport(params) => {
            let grid = normalized_grid(n_fft);
            let (g1, g2) = ckd_kernel(params, &grid, &grid)?;
            let mut amb = ambiguity_function(z, n_fft).lag_major;
            let inv = 1.0 / n_fft as f64;
            for (row, &lag_gain) in amb.iter_mut().zip(&g2) {
                if lag_gain == 0.0 {
                    row.fill(Complex64::new(0.0, 0.0));
                    continue;
                }
                for (v, &dop_gain) in row.iter_mut().zip(&g1) {
                    *v *= dop_gain * lag_gain;
                }
                fft_in_place(row, true);
                row.iter_mut().for_each(|v| *v *= inv);
            }
            amb
        }
    };

    let mut out = Array2::zeros((len, n_fft));
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    for (n, mut dst) in out.rows_mut().into_iter().enumerate() {
        for (b, row) in buf.iter_mut().zip(&lag_major) {
            *b = row[n];
        }
        fft_in_place(&mut buf, false);
        // Factor 2: each lag step spans two samples.
        dst.iter_mut().zip(&buf).for_each(|(d, v)| *d = 2.0 * v);
    }
    Ok(out)
}

fn real_tfr(
    seg: ArrayView2<'_, f64>,
    sample_rate_hz: f64,
    kernel: &SmoothingKernel,
) -> Result<Tfr, TfrError> {
    let analytic = analytic_segment(seg)?;
    let len = seg.ncols();
    let n_fft = len.next_power_of_two();
    let values = analytic
        .samples
        .rows()
        .into_iter()
        .map(|z| distribution(&z.to_vec(), kernel).map(|d| d.mapv(|v| v.re)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Tfr {
        values,
        time_step_s: 1.0 / sample_rate_hz,
        freq_step_hz: sample_rate_hz / (2.0 * n_fft as f64),
    })
}

/// Compact kernel distribution of every channel of a `channels × samples`
/// segment, block-averaged down to `M × M` when the factor is below one.
pub fn compute_ckd_tfr(
    seg: ArrayView2<'_, f64>,
    sample_rate_hz: f64,
    cfg: &TfrConfig,
) -> Result<Tfr, TfrError> {
    let full = real_tfr(seg, sample_rate_hz, &SmoothingKernel::CompactSupport(cfg.ckd))?;
    downsample_tfr(&full, cfg.downsample_factor)
}

/// Unsmoothed Wigner-Ville distribution, full resolution.
pub fn wvd(seg: ArrayView2<'_, f64>, sample_rate_hz: f64) -> Result<Tfr, TfrError> {
    real_tfr(seg, sample_rate_hz, &SmoothingKernel::Identity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tfr::analytic_signal;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn full_res(c: CkdParams) -> TfrConfig {
        TfrConfig { downsample_factor: 1.0, ckd: c }
    }

    fn row_seg(x: Vec<f64>) -> Array2<f64> {
        let n = x.len();
        Array2::from_shape_vec((1, n), x).unwrap()
    }

    #[test]
    fn output_is_real_to_round_off() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for kernel in [SmoothingKernel::Identity, SmoothingKernel::CompactSupport(CkdParams::default())] {
            for len in [64usize, 200] {
                let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
                let z = analytic_signal(&x).unwrap();
                let d = distribution(&z, &kernel).unwrap();
                let peak = d.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
                let residue = d.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
                assert!(residue < 1e-9 * peak, "{kernel:?} len {len}: {residue} vs {peak}");
            }
        }
    }

    #[test]
    fn energy_matches_analytic_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
        let energy: f64 = analytic_signal(&x).unwrap().iter().map(|v| v.norm_sqr()).sum();
        let seg = row_seg(x);
        let ckd = compute_ckd_tfr(seg.view(), 1000.0, &full_res(CkdParams::default())).unwrap();
        assert!((ckd.energy(0) / energy - 1.0).abs() < 0.02);
        let w = wvd(seg.view(), 1000.0).unwrap();
        assert!((w.energy(0) / energy - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic() {
        let x: Vec<f64> = (0..128).map(|i| (i as f64 * 0.3).sin() * (i as f64 * 0.01).cos()).collect();
        let seg = row_seg(x);
        let cfg = TfrConfig { downsample_factor: 0.125, ckd: CkdParams::default() };
        let a = compute_ckd_tfr(seg.view(), 1.0, &cfg).unwrap();
        let b = compute_ckd_tfr(seg.view(), 1.0, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shape(), (16, 16));
    }

    #[test]
    fn tone_localizes_on_expected_bin() {
        let n = 128;
        let j = 13;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * j as f64 * i as f64 / n as f64).cos()).collect();
        let tfr = compute_ckd_tfr(row_seg(x).view(), 1.0, &full_res(CkdParams::default())).unwrap();
        for bin in tfr.ridge(0) {
            assert!(bin.abs_diff(2 * j) <= 1, "bin {bin}");
        }
    }

    #[test]
    fn multichannel_shapes_agree() {
        let seg = Array2::from_shape_fn((2, 100), |(q, i)| ((q + 1) as f64 * i as f64 * 0.2).sin());
        let tfr = compute_ckd_tfr(seg.view(), 100.0, &full_res(CkdParams::default())).unwrap();
        assert_eq!(tfr.channel_count(), 2);
        assert_eq!(tfr.values[0].dim(), (100, 128));
        assert_eq!(tfr.values[1].dim(), (100, 128));
        assert_eq!(tfr.freq_step_hz, 100.0 / 256.0);
    }

    #[test]
    fn short_segment_rejected() {
        let seg = row_seg(vec![1.0, 2.0, 3.0]);
        assert!(matches!(wvd(seg.view(), 1.0), Err(TfrError::DegenerateLength(3))));
    }
}
