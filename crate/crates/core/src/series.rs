//! Uniformly sampled series and the elementwise operations shared by every
//! stage: Z-score normalization, fixed-length segmentation and MAE.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRange { name: "rate", value: rate, range: "(0, inf)" })
    }
}

/// A real-valued series sampled at `rate` Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSeries {
    samples: Vec<f64>,
    rate: f64,
}

impl RealSeries {
    pub fn new(samples: Vec<f64>, rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(Self { samples, rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Length in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    /// Same rate, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self { samples, rate: self.rate }
    }
}

/// A complex-valued series sampled at `rate` Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    samples: Vec<Complex64>,
    rate: f64,
}

impl ComplexSeries {
    pub fn new(samples: Vec<Complex64>, rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(Self { samples, rate })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }
}

/// A fixed-length window cut from a parent series.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub samples: Vec<f64>,
    /// Index of the first sample in the parent series.
    pub origin_index: usize,
    pub duration_s: f64,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Mean and population standard deviation.
pub fn moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

/// Z-score normalization with the population (1/N) standard deviation.
pub fn zscore(x: &RealSeries) -> Result<RealSeries> {
    if x.len() < 2 {
        return Err(Error::EmptyInput { len: x.len(), min: 2 });
    }
    let (mean, std) = moments(x.samples());
    if !(std > 0.0) || !std.is_finite() {
        return Err(Error::DegenerateVariance);
    }
    let mut out: Vec<f64> = x.samples().iter().map(|v| (v - mean) / std).collect();
    // One refinement pass absorbs the rounding left by the first.
    let (m2, s2) = moments(&out);
    for v in &mut out {
        *v = (*v - m2) / s2;
    }
    Ok(x.with_samples(out))
}

/// Number of samples in a window of `seconds` at `rate`.
pub fn window_len(seconds: f64, rate: f64) -> Result<usize> {
    let l = libm::round(seconds * rate);
    if !(l >= 2.0) || !l.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!(
            "window of {seconds} s at {rate} Hz is shorter than 2 samples"
        )));
    }
    Ok(l as usize)
}

/// Cuts `x` into non-overlapping segments of `seg_seconds`; the trailing
/// remainder is dropped.
pub fn segment(x: &RealSeries, seg_seconds: f64) -> Result<Vec<Segment>> {
    let l = window_len(seg_seconds, x.rate())?;
    if l > x.len() {
        return Err(Error::SegmentTooLong { segment: l, len: x.len() });
    }
    let duration_s = l as f64 / x.rate();
    Ok(x.samples()
        .chunks_exact(l)
        .enumerate()
        .map(|(i, chunk)| Segment { samples: chunk.to_vec(), origin_index: i * l, duration_s })
        .collect())
}

/// Mean absolute error between two equal-length buffers.
pub fn mae(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), actual: b.len() });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput { len: 0, min: 1 });
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| libm::fabs(x - y)).sum();
    Ok(sum / a.len() as f64)
}
