use super::{Recording, SignalError};
use ndarray::{s, Array2};

/// Equal-length, non-overlapping windows of a recording in temporal order.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSet {
    segments: Vec<Array2<f64>>,
    segment_len_s: f64,
    sample_rate_hz: f64,
}

impl SegmentSet {
    pub fn segments(&self) -> &[Array2<f64>] {
        &self.segments
    }

    pub fn into_segments(self) -> Vec<Array2<f64>> {
        self.segments
    }

    pub fn segment_len_s(&self) -> f64 {
        self.segment_len_s
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Samples per channel in each segment.
    pub fn segment_samples(&self) -> usize {
        self.segments.first().map_or(0, |s| s.ncols())
    }
}

/// Number of samples in a window of `segment_len_s` at `sample_rate_hz`, if whole.
pub fn samples_per_segment(segment_len_s: f64, sample_rate_hz: f64) -> Option<usize> {
    let exact = segment_len_s * sample_rate_hz;
    let rounded = exact.round();
    ((exact - rounded).abs() <= 1e-9 * exact.abs().max(1.0) && rounded >= 2.0)
        .then_some(rounded as usize)
}

/// Cuts the recording into `floor(T / L)` consecutive windows; a trailing
/// partial window is dropped.
pub fn segment(rec: &Recording, segment_len_s: f64) -> Result<SegmentSet, SignalError> {
    let width = samples_per_segment(segment_len_s, rec.sample_rate_hz())
        .ok_or(SignalError::FractionalSegment(segment_len_s))?;
    let count = rec.len() / width;
    if count == 0 {
        return Err(SignalError::SegmentTooLong {
            segment_len_s,
            duration_s: rec.duration_s(),
        });
    }
    let segments = (0..count)
        .map(|p| rec.samples().slice(s![.., p * width..(p + 1) * width]).to_owned())
        .collect();
    Ok(SegmentSet {
        segments,
        segment_len_s,
        sample_rate_hz: rec.sample_rate_hz(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::concatenate;
    use ndarray::Axis;
    use proptest::prelude::*;

    fn ramp(len: usize, fs: f64) -> Recording {
        let a: Vec<f64> = (0..len).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..len).map(|i| -(i as f64)).collect();
        Recording::from_channels(vec![a, b], fs).unwrap()
    }

    #[test]
    fn one_second_into_tenths() {
        let set = segment(&ramp(1000, 1000.0), 0.1).unwrap();
        assert_eq!(set.len(), 10);
        assert_eq!(set.segment_samples(), 100);
    }

    #[test]
    fn table_one_window_width() {
        assert_eq!(samples_per_segment(0.1, 20_000.0), Some(2000));
        assert_eq!(samples_per_segment(0.078125, 25_600.0), Some(2000));
    }

    #[test]
    fn trailing_remainder_dropped() {
        let set = segment(&ramp(1050, 1000.0), 0.1).unwrap();
        assert_eq!(set.len(), 10);
        assert_eq!(set.segments()[9][[0, 99]], 999.0);
    }

    #[test]
    fn too_long_segment() {
        assert!(matches!(
            segment(&ramp(50, 1000.0), 0.1),
            Err(SignalError::SegmentTooLong { .. })
        ));
    }

    #[test]
    fn fractional_width_rejected() {
        assert!(matches!(
            segment(&ramp(500, 1000.0), 0.0105),
            Err(SignalError::FractionalSegment(_))
        ));
    }

    proptest! {
        #[test]
        fn concatenation_reproduces_prefix(len in 4usize..400, width in 2usize..40) {
            prop_assume!(len >= width);
            let fs = 100.0;
            let rec = ramp(len, fs);
            let set = segment(&rec, width as f64 / fs).unwrap();
            let views: Vec<_> = set.segments().iter().map(|s| s.view()).collect();
            let joined = concatenate(Axis(1), &views).unwrap();
            let used = set.len() * width;
            prop_assert_eq!(set.len(), len / width);
            prop_assert_eq!(joined, rec.samples().slice(s![.., ..used]).to_owned());
        }
    }
}
