use super::{CkdParams, TfrError};

/// FFT-order bin positions normalized to `[-1, 1)`: bin `k` maps to
/// `k / (n/2)` for `k < n/2` and `(k - n) / (n/2)` above.
pub fn normalized_grid(n: usize) -> Vec<f64> {
    let half = n as f64 / 2.0;
    (0..n)
        .map(|k| {
            let signed = if k < n.div_ceil(2) { k as isize } else { k as isize - n as isize };
            signed as f64 / half
        })
        .collect()
}

/// `exp(c + c·cutoff² / (x² − cutoff²))` inside `|x| < cutoff`, exactly zero outside.
pub fn compact_window(x: f64, c: f64, cutoff: f64) -> f64 {
    if x.abs() >= cutoff {
        return 0.0;
    }
    let cut2 = cutoff * cutoff;
    (c + c * cut2 / (x * x - cut2)).exp()
}

/// Doppler (`G1`) and lag (`G2`) windows of the compact kernel distribution,
/// sampled on the given normalized grids.
pub fn ckd_kernel(
    params: &CkdParams,
    doppler_grid: &[f64],
    lag_grid: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), TfrError> {
    params.validate()?;
    let g1 = doppler_grid
        .iter()
        .map(|&nu| compact_window(nu, params.c, params.d_cutoff))
        .collect();
    let g2 = lag_grid
        .iter()
        .map(|&tau| compact_window(tau, params.c, params.e_cutoff))
        .collect();
    Ok((g1, g2))
}
