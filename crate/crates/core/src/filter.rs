//! Butterworth low-pass design as cascaded second-order sections, with
//! single-pass and zero-phase (forward-backward) application.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::series::RealSeries;

/// Default order of the PPG low-pass filter.
pub const PPG_LPF_ORDER: usize = 12;
/// Default cutoff of the PPG low-pass filter, Hz.
pub const PPG_LPF_CUTOFF: f64 = 3.4;

/// One biquad, `a0` normalized to 1, run in transposed direct form II.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// State that makes the section output `dc_gain * u` for constant input `u`.
    fn steady_state(&self, u: f64) -> [f64; 2] {
        let y = self.dc_gain() * u;
        let z2 = self.b[2] * u - self.a[1] * y;
        let z1 = self.b[1] * u - self.a[0] * y + z2;
        [z1, z2]
    }

    fn run(&self, x: &mut [f64], mut z: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        for v in x.iter_mut() {
            let input = *v;
            let y = b0 * input + z[0];
            z[0] = b1 * input - a1 * y + z[1];
            z[1] = b2 * input - a2 * y;
            *v = y;
        }
    }

    fn response(&self, w: f64) -> (f64, f64) {
        // H(e^{jw}) as (re, im)
        let (c1, s1) = (libm::cos(w), -libm::sin(w));
        let (c2, s2) = (libm::cos(2.0 * w), -libm::sin(2.0 * w));
        let nr = self.b[0] + self.b[1] * c1 + self.b[2] * c2;
        let ni = self.b[1] * s1 + self.b[2] * s2;
        let dr = 1.0 + self.a[0] * c1 + self.a[1] * c2;
        let di = self.a[0] * s1 + self.a[1] * s2;
        let den = dr * dr + di * di;
        ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
    }
}

/// Cascade of biquads implementing an N-th order Butterworth low-pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Butterworth {
    sections: Vec<Biquad>,
    cutoff: f64,
    rate: f64,
}

impl Butterworth {
    /// Bilinear-transform design with the cutoff pre-warped, so the digital
    /// response is exactly `1/sqrt(2)` at `cutoff`.
    pub fn lowpass(order: usize, cutoff: f64, rate: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("filter order must be at least 1".into()));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidRange { name: "rate", value: rate, range: "(0, inf)" });
        }
        if !(cutoff > 0.0 && 2.0 * cutoff < rate) {
            return Err(Error::NyquistViolation { cutoff, rate });
        }
        let k = libm::tan(PI * cutoff / rate);
        let k2 = k * k;
        let mut sections = Vec::with_capacity(order.div_ceil(2));
        for i in 0..order / 2 {
            // analog pole pair at -sin(theta) +/- j cos(theta)
            let theta = PI * (2 * i + 1) as f64 / (2 * order) as f64;
            let damp = 2.0 * libm::sin(theta) * k;
            let a0 = 1.0 + damp + k2;
            sections.push(Biquad {
                b: [k2 / a0, 2.0 * k2 / a0, k2 / a0],
                a: [2.0 * (k2 - 1.0) / a0, (1.0 - damp + k2) / a0],
            });
        }
        if order % 2 == 1 {
            let a0 = 1.0 + k;
            sections.push(Biquad { b: [k / a0, k / a0, 0.0], a: [(k - 1.0) / a0, 0.0] });
        }
        Ok(Self { sections, cutoff, rate })
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn order(&self) -> usize {
        self.sections.iter().map(|s| if s.b[2] == 0.0 && s.a[1] == 0.0 { 1 } else { 2 }).sum()
    }

    /// Single-pass magnitude response at `freq` Hz.
    pub fn magnitude(&self, freq: f64) -> f64 {
        let w = 2.0 * PI * freq / self.rate;
        self.sections
            .iter()
            .map(|s| {
                let (re, im) = s.response(w);
                libm::sqrt(re * re + im * im)
            })
            .product()
    }

    /// Causal filtering from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for s in &self.sections {
            s.run(&mut y, [0.0; 2]);
        }
        y
    }

    fn filter_steady(&self, y: &mut [f64]) {
        let Some(&first) = y.first() else { return };
        let mut level = first;
        for s in &self.sections {
            s.run(y, s.steady_state(level));
            level *= s.dc_gain();
        }
    }

    /// Zero-phase filtering: forward then backward over an odd-reflected
    /// extension, each pass started in the steady state of its first sample.
    /// The overall magnitude response is the square of [`Self::magnitude`].
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = (n - 1).min(3 * libm::ceil(self.rate / self.cutoff) as usize);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
        self.filter_steady(&mut ext);
        ext.reverse();
        self.filter_steady(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Zero-phase Butterworth low-pass of a series.
pub fn butterworth_lpf(x: &RealSeries, order: usize, cutoff: f64) -> Result<RealSeries> {
    let f = Butterworth::lowpass(order, cutoff, x.rate())?;
    Ok(x.with_samples(f.filtfilt(x.samples())))
}
