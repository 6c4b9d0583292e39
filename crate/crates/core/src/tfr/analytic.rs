use super::TfrError;
use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    plan.process(buf);
}

/// Analytic signal by spectral masking: negative bins zeroed, strictly
/// positive bins doubled, DC (and Nyquist for even lengths) kept.
pub fn analytic_signal(x: &[f64]) -> Result<Vec<Complex64>, TfrError> {
    let n = x.len();
    if n < 2 {
        return Err(TfrError::DegenerateLength(n));
    }
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf, false);
    // Bins 1..=(n-1)/2 are strictly positive for both parities.
    let positive_end = (n - 1) / 2;
    for b in &mut buf[1..=positive_end] {
        *b *= 2.0;
    }
    let negative_start = n / 2 + 1;
    for b in &mut buf[negative_start..] {
        *b = Complex64::new(0.0, 0.0);
    }
    fft_in_place(&mut buf, true);
    let scale = 1.0 / n as f64;
    Ok(x
        .iter()
        .zip(buf)
        .map(|(&re, b)| Complex64::new(re, b.im * scale))
        .collect())
}

/// Per-channel analytic signals of a `channels × samples` segment.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSegment {
    pub samples: Array2<Complex64>,
}

impl AnalyticSegment {
    pub fn channel(&self, q: usize) -> Vec<Complex64> {
        self.samples.row(q).to_vec()
    }

    pub fn energy(&self, q: usize) -> f64 {
        self.samples.row(q).iter().map(|z| z.norm_sqr()).sum()
    }
}

pub fn analytic_segment(seg: ArrayView2<'_, f64>) -> Result<AnalyticSegment, TfrError> {
    let (q, n) = seg.dim();
    let mut samples = Array2::zeros((q, n));
    for (src, mut dst) in seg.rows().into_iter().zip(samples.rows_mut()) {
        let z = analytic_signal(&src.to_vec())?;
        dst.iter_mut().zip(z).for_each(|(d, v)| *d = v);
    }
    Ok(AnalyticSegment { samples })
}
