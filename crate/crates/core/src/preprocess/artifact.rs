use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::series::{moments, window_len, RealSeries};

/// Default peak |z| above which a window counts as an artifact.
pub const ARTIFACT_Z: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlaggedWindow {
    /// Window number; equals the segment index downstream.
    pub index: usize,
    pub start: usize,
    pub len: usize,
    pub peak_z: f64,
}

/// Splits `x` into consecutive windows of `window_s` and flags those whose
/// largest |z-score| (against the whole record's mean and population std)
/// exceeds `z_thresh`. A trailing partial window is scanned too.
pub fn artifact_scan(x: &RealSeries, z_thresh: f64, window_s: f64) -> Result<Vec<FlaggedWindow>> {
    let len = window_len(window_s, x.rate())?;
    if x.len() < len {
        return Err(Error::InputTooShort { len: x.len(), min: len });
    }
    let (mean, std) = moments(x.samples());
    if !(std > 0.0) {
        return Ok(Vec::new());
    }
    Ok(x.samples()
        .chunks(len)
        .enumerate()
        .filter_map(|(index, w)| {
            let peak_z = w.iter().map(|v| libm::fabs(v - mean) / std).fold(0.0, f64::max);
            (peak_z > z_thresh).then_some(FlaggedWindow { index, start: index * len, len: w.len(), peak_z })
        })
        .collect())
}

/// Replaces each flagged window with a straight line between its
/// neighbouring samples, so the artifact does not leak into filtering and
/// normalization of the rest of the record.
pub fn bridge_windows(x: &RealSeries, flagged: &[FlaggedWindow]) -> RealSeries {
    let mut out = x.samples().to_vec();
    let n = out.len();
    for w in flagged {
        let end = (w.start + w.len).min(n);
        let left = if w.start > 0 { Some(out[w.start - 1]) } else { None };
        let right = if end < n { Some(out[end]) } else { None };
        let (a, b) = match (left, right) {
            (Some(a), Some(b)) => (a, b),
            (Some(a), None) => (a, a),
            (None, Some(b)) => (b, b),
            (None, None) => (0.0, 0.0),
        };
        let span = (end - w.start + 1) as f64;
        for (k, v) in out[w.start..end].iter_mut().enumerate() {
            let f = (k + 1) as f64 / span;
            *v = a * (1.0 - f) + b * f;
        }
    }
    x.with_samples(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn clean(n: usize, rate: f64) -> Vec<f64> {
        (0..n).map(|i| libm::sin(2.0 * PI * 1.2 * i as f64 / rate)).collect()
    }

    #[test]
    fn clean_record_has_no_flags() {
        let x = RealSeries::new(clean(25_000, 2500.0), 2500.0).unwrap();
        assert!(artifact_scan(&x, ARTIFACT_Z, 2.2).unwrap().is_empty());
    }

    #[test]
    fn spike_flags_only_its_window() {
        let mut v = clean(25_000, 2500.0);
        // 20 standard deviations (std of a unit sine is 1/sqrt 2)
        v[12_345] += 20.0 / core::f64::consts::SQRT_2;
        let x = RealSeries::new(v, 2500.0).unwrap();
        let f = artifact_scan(&x, ARTIFACT_Z, 2.2).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].index, 12_345 / 5500);
        assert!(f[0].start <= 12_345 && 12_345 < f[0].start + f[0].len);
        assert!(artifact_scan(&x, f64::INFINITY, 2.2).unwrap().is_empty());
    }

    #[test]
    fn bridging_removes_the_spike() {
        let mut v = clean(11_000, 2500.0);
        v[7000] = 50.0;
        let x = RealSeries::new(v, 2500.0).unwrap();
        let f = artifact_scan(&x, ARTIFACT_Z, 2.2).unwrap();
        let b = bridge_windows(&x, &f);
        assert!(b.samples().iter().all(|s| s.abs() <= 1.0 + 1e-12));
        assert_eq!(&b.samples()[..5500], &x.samples()[..5500]);
    }

    #[test]
    fn short_input() {
        let x = RealSeries::new(clean(100, 2500.0), 2500.0).unwrap();
        assert!(matches!(artifact_scan(&x, 6.0, 2.2), Err(Error::InputTooShort { .. })));
    }
}
