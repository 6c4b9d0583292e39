use super::analytic::fft_in_place;
use num_complex::Complex64;

/// Largest lag index used for a transform of size `n_fft`.
pub(crate) fn max_lag(n_fft: usize) -> usize {
    (n_fft / 2).saturating_sub(1)
}

/// Instantaneous autocorrelation stored lag-major: `k[m][n]` for lag index
/// `m` in FFT order (negative lags wrap to the top) and time `n < n_fft`.
///
/// Entries whose shifted indices fall outside `z` are zero.
pub fn instantaneous_autocorrelation(z: &[Complex64], n_fft: usize) -> Vec<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let len = z.len() as isize;
    let at = |i: isize| if i >= 0 && i < len { z[i as usize] } else { zero };
    let lmax = max_lag(n_fft) as isize;
    let mut k = vec![vec![zero; n_fft]; n_fft];
    for m in -lmax..=lmax {
        let row = &mut k[m.rem_euclid(n_fft as isize) as usize];
        for (n, slot) in row.iter_mut().enumerate() {
            let n = n as isize;
            *slot = at(n + m) * at(n - m).conj();
        }
    }
    k
}

/// Doppler-lag ambiguity function, both axes in FFT bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityFunction {
    /// `lag_major[m][nu]`
    pub lag_major: Vec<Vec<Complex64>>,
    pub n_fft: usize,
}

impl AmbiguityFunction {
    pub fn get(&self, doppler_bin: usize, lag_bin: usize) -> Complex64 {
        self.lag_major[lag_bin][doppler_bin]
    }

    /// Value at signed bin offsets, wrapping negatives.
    pub fn at(&self, doppler: isize, lag: isize) -> Complex64 {
        let n = self.n_fft as isize;
        self.get(doppler.rem_euclid(n) as usize, lag.rem_euclid(n) as usize)
    }
}

/// `A(ν, m) = Σ_n K[n, m] e^{-j2πνn/N}` over a zero-padded grid of size `n_fft`.
pub fn ambiguity_function(z: &[Complex64], n_fft: usize) -> AmbiguityFunction {
    let mut lag_major = instantaneous_autocorrelation(z, n_fft);
    for row in &mut lag_major {
        fft_in_place(row, false);
    }
    AmbiguityFunction { lag_major, n_fft }
}
