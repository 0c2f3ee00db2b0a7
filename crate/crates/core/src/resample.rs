//! Kaiser-windowed sinc resampling.
//!
//! When the rate ratio reduces to a fraction `up/down` with a small
//! numerator, a polyphase bank with one tap set per output phase is built
//! once and reused. Other ratios evaluate the same kernel per output sample.
//! The kernel spans [`TAPS`] samples of the slower of the two rates, so it
//! also acts as the anti-aliasing filter when decimating. Samples past the
//! ends of the input repeat the edge values.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::series::RealSeries;

/// Kernel length, in samples of the lower rate.
pub const TAPS: usize = 64;
/// Kaiser window shape parameter.
pub const KAISER_BETA: f64 = 8.0;

const MAX_PHASES: u64 = 4096;

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = core::f64::consts::PI * x;
        libm::sin(px) / px
    }
}

/// Best fraction `p/q` for `x` with `q <= max_den`, if it is exact to 1e-12.
fn rational(x: f64, max_den: u64) -> Option<(u64, u64)> {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = libm::floor(r);
        if a > 1e12 {
            break;
        }
        let ai = a as u64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if libm::fabs(h1 as f64 / k1 as f64 - x) <= 1e-12 * x {
            return Some((h1, k1));
        }
        let frac = r - a;
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

/// Resampling kernel for one input/output rate pair.
#[derive(Debug, Clone)]
pub struct Resampler {
    ratio: f64,
    cutoff: f64,
    half_width: f64,
    reach: isize,
    // (up, down, taps per phase, flattened bank)
    bank: Option<(u64, u64, Vec<f64>)>,
}

impl Resampler {
    pub fn new(input_rate: f64, output_rate: f64) -> Result<Self> {
        for (name, r) in [("input_rate", input_rate), ("target_rate", output_rate)] {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidRange { name, value: r, range: "(0, inf)" });
            }
        }
        let ratio = output_rate / input_rate;
        let cutoff = ratio.min(1.0);
        let half_width = (TAPS / 2) as f64 / cutoff;
        let reach = libm::ceil(half_width) as isize;
        let mut me = Self { ratio, cutoff, half_width, reach, bank: None };
        if let Some((up, down)) = rational(ratio, MAX_PHASES) {
            let mut bank = Vec::with_capacity(up as usize * 2 * reach as usize);
            for phase in 0..up {
                // fractional position of outputs in this phase
                let frac = ((phase * down) % up) as f64 / up as f64;
                bank.extend(me.taps(frac));
            }
            me.bank = Some((up, down, bank));
        }
        Ok(me)
    }

    /// Normalized tap weights for input offsets `1 - reach ..= reach`
    /// around a position `frac` past an integer input index.
    fn taps(&self, frac: f64) -> Vec<f64> {
        let mut w: Vec<f64> = (1 - self.reach..=self.reach)
            .map(|j| {
                let t = j as f64 - frac;
                let u = t / self.half_width;
                if libm::fabs(u) >= 1.0 {
                    0.0
                } else {
                    let win = bessel_i0(KAISER_BETA * libm::sqrt(1.0 - u * u)) / bessel_i0(KAISER_BETA);
                    self.cutoff * sinc(self.cutoff * t) * win
                }
            })
            .collect();
        let sum: f64 = w.iter().sum();
        for v in &mut w {
            *v /= sum;
        }
        w
    }

    /// Number of output samples produced for `n` input samples.
    pub fn output_len(&self, n: usize) -> usize {
        if n == 0 {
            return 0;
        }
        match &self.bank {
            Some((up, down, _)) => ((n as u64 - 1) * up / down) as usize + 1,
            None => libm::floor((n - 1) as f64 * self.ratio + 1e-9) as usize + 1,
        }
    }

    pub fn process(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let m = self.output_len(n);
        let last = n as isize - 1;
        let at = |i: isize| x[i.clamp(0, last) as usize];
        let width = 2 * self.reach as usize;
        let mut out = Vec::with_capacity(m);
        for k in 0..m {
            let (base, weights) = match &self.bank {
                Some((up, down, bank)) => {
                    let pos = k as u64 * down;
                    let phase = (pos % up) as usize;
                    ((pos / up) as isize, &bank[phase * width..(phase + 1) * width])
                }
                None => {
                    let pos = k as f64 / self.ratio;
                    let base = libm::floor(pos);
                    let w = self.taps(pos - base);
                    out.push(
                        w.iter()
                            .enumerate()
                            .map(|(j, wj)| wj * at(base as isize + 1 - self.reach + j as isize))
                            .sum(),
                    );
                    continue;
                }
            };
            let start = base + 1 - self.reach;
            let acc = if start >= 0 && start + width as isize <= n as isize {
                let s = start as usize;
                weights.iter().zip(&x[s..s + width]).map(|(w, v)| w * v).sum()
            } else {
                weights.iter().enumerate().map(|(j, w)| w * at(start + j as isize)).sum()
            };
            out.push(acc);
        }
        out
    }
}

/// Resamples `x` to `target_rate`.
pub fn resample(x: &RealSeries, target_rate: f64) -> Result<RealSeries> {
    if x.is_empty() {
        return Err(Error::EmptyInput { len: 0, min: 1 });
    }
    let r = Resampler::new(x.rate(), target_rate)?;
    RealSeries::new(r.process(x.samples()), target_rate)
}
