//! Multi-level db2 discrete wavelet transform, band-selective
//! reconstruction and wavelet baseline removal.
//!
//! The transform is periodized, which makes it orthogonal and therefore
//! exactly invertible. To handle arbitrary lengths the input is first
//! embedded in a symmetric (mirror) extension whose length is a multiple of
//! `2^levels`, with at least `2^levels` samples of margin on each side.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::series::RealSeries;

/// Daubechies-2 decomposition low-pass filter.
pub const DB2_LOW: [f64; 4] = {
    const S3: f64 = 1.732_050_807_568_877_2;
    const D: f64 = 5.656_854_249_492_381; // 4 * sqrt(2)
    [(1.0 + S3) / D, (3.0 + S3) / D, (3.0 - S3) / D, (1.0 - S3) / D]
};

/// Decomposition depth of the radio denoiser.
pub const RADIO_LEVELS: usize = 10;
/// Detail levels the radio denoiser keeps (about 0.71-5.7 Hz at the
/// canonical rate). Level 8 (0.36-0.71 Hz) is dropped: it holds the
/// respiration fundamental's skirt and its low harmonics, and no cardiac
/// fundamental above about 43 bpm.
pub const RADIO_KEEP: [usize; 3] = [5, 6, 7];
/// The PPG baseline is the approximation below this frequency.
pub const BASELINE_MAX_HZ: f64 = 0.2;

fn db2_high() -> [f64; 4] {
    let h = DB2_LOW;
    [h[3], -h[2], h[1], -h[0]]
}

/// Wavelet coefficients of a padded signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// `details[j - 1]` holds level `j`; level 1 is the finest.
    pub details: Vec<Vec<f64>>,
    pub approx: Vec<f64>,
    offset: usize,
    len: usize,
}

impl Decomposition {
    pub fn levels(&self) -> usize {
        self.details.len()
    }
}

fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

fn analysis_step(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = x.len();
    let lo = DB2_LOW;
    let hi = db2_high();
    let half = m / 2;
    let mut a = vec![0.0; half];
    let mut d = vec![0.0; half];
    for k in 0..half {
        let (mut sa, mut sd) = (0.0, 0.0);
        for t in 0..4 {
            let v = x[(2 * k + t) % m];
            sa += lo[t] * v;
            sd += hi[t] * v;
        }
        a[k] = sa;
        d[k] = sd;
    }
    (a, d)
}

fn synthesis_step(a: &[f64], d: &[f64]) -> Vec<f64> {
    let m = 2 * a.len();
    let lo = DB2_LOW;
    let hi = db2_high();
    let mut x = vec![0.0; m];
    for k in 0..a.len() {
        for t in 0..4 {
            x[(2 * k + t) % m] += lo[t] * a[k] + hi[t] * d[k];
        }
    }
    x
}

/// `levels`-deep db2 decomposition of `x`. Needs `x.len() >= 2^levels`.
pub fn wavedec(x: &[f64], levels: usize) -> Result<Decomposition> {
    if levels == 0 || levels > 30 {
        return Err(Error::InvalidArgument(alloc::format!("unsupported depth {levels}")));
    }
    let block = 1usize << levels;
    if x.len() < block {
        return Err(Error::InputTooShort { len: x.len(), min: block });
    }
    let n = x.len();
    let padded = (n + 2 * block).div_ceil(block) * block;
    let offset = (padded - n) / 2;
    let mut cur: Vec<f64> = (0..padded).map(|i| x[reflect(i as isize - offset as isize, n)]).collect();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (a, d) = analysis_step(&cur);
        details.push(d);
        cur = a;
    }
    Ok(Decomposition { details, approx: cur, offset, len: n })
}

/// Inverse of [`wavedec`], cropped back to the original length.
pub fn waverec(dec: &Decomposition) -> Vec<f64> {
    let mut cur = dec.approx.clone();
    for d in dec.details.iter().rev() {
        cur = synthesis_step(&cur, d);
    }
    cur[dec.offset..dec.offset + dec.len].to_vec()
}

/// Flavor of the transform behind [`dwt_denoise`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WaveletMode {
    /// Critically sampled transform ([`wavedec`] / [`waverec`]).
    Decimated,
    /// Undecimated transform. Zeroing bands is then a time-invariant
    /// filter, so strong out-of-band components do not alias into the kept
    /// levels.
    #[default]
    Stationary,
}

impl WaveletMode {
    pub fn name(self) -> &'static str {
        match self {
            WaveletMode::Decimated => "decimated",
            WaveletMode::Stationary => "stationary",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "decimated" => Some(WaveletMode::Decimated),
            "stationary" => Some(WaveletMode::Stationary),
            _ => None,
        }
    }
}

/// Which bands survive [`dwt_denoise`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenoiseBands {
    pub levels: usize,
    pub keep_details: Vec<usize>,
    pub keep_approx: bool,
    pub mode: WaveletMode,
}

impl Default for DenoiseBands {
    fn default() -> Self {
        Self { levels: RADIO_LEVELS, keep_details: RADIO_KEEP.to_vec(), keep_approx: false, mode: WaveletMode::default() }
    }
}

impl DenoiseBands {
    /// Every band kept; reconstruction is the identity.
    pub fn all(levels: usize) -> Self {
        Self { levels, keep_details: (1..=levels).collect(), keep_approx: true, mode: WaveletMode::default() }
    }
}

/// Zeroes the detail levels not in `bands.keep_details` (and the
/// approximation unless kept) and reconstructs.
pub fn dwt_denoise(x: &RealSeries, bands: &DenoiseBands) -> Result<RealSeries> {
    if let Some(&bad) = bands.keep_details.iter().find(|&&j| j == 0 || j > bands.levels) {
        return Err(Error::InvalidArgument(alloc::format!(
            "detail level {bad} outside 1..={}",
            bands.levels
        )));
    }
    if bands.mode == WaveletMode::Stationary {
        let keep = |j: usize| bands.keep_details.contains(&j);
        return Ok(x.with_samples(stationary_bands(x.samples(), bands.levels, &keep, bands.keep_approx)?));
    }
    let mut dec = wavedec(x.samples(), bands.levels)?;
    for (i, d) in dec.details.iter_mut().enumerate() {
        if !bands.keep_details.contains(&(i + 1)) {
            d.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    if !bands.keep_approx {
        dec.approx.iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(x.with_samples(waverec(&dec)))
}

/// Undecimated (a trous) db2 analysis to `depth`, followed by synthesis
/// from the detail levels selected by `keep` and, optionally, the
/// approximation.
///
/// The filters are the db2 pair scaled by `1/sqrt(2)` and dilated by `2^j`
/// at level `j`; synthesis runs the time-reversed filters, so the whole
/// chain is zero-phase and sums to the identity when everything is kept.
/// The input is mirror-extended by the cumulative filter reach, which makes
/// every output sample equal to that of the infinitely extended signal.
pub fn stationary_bands(x: &[f64], depth: usize, keep: &dyn Fn(usize) -> bool, keep_approx: bool) -> Result<Vec<f64>> {
    if depth == 0 || depth > 30 {
        return Err(Error::InvalidArgument(alloc::format!("unsupported depth {depth}")));
    }
    let n = x.len();
    if n < 1usize << depth {
        return Err(Error::InputTooShort { len: n, min: 1 << depth });
    }
    let margin = 3 * ((1usize << depth) - 1);
    let len = n + 2 * margin;
    let h = DB2_LOW.map(|v| v * core::f64::consts::FRAC_1_SQRT_2);
    let g = db2_high().map(|v| v * core::f64::consts::FRAC_1_SQRT_2);
    let mut cur: Vec<f64> = (0..len).map(|i| x[reflect(i as isize - margin as isize, n)]).collect();
    let mut details: Vec<Option<Vec<f64>>> = Vec::with_capacity(depth);
    let mut next = vec![0.0; len];
    for j in 0..depth {
        let s = 1usize << j;
        let tap = |f: &[f64; 4], src: &[f64], i: usize| -> f64 {
            (0..4).filter(|t| i + t * s < len).map(|t| f[t] * src[i + t * s]).sum()
        };
        details.push(keep(j + 1).then(|| (0..len).map(|i| tap(&g, &cur, i)).collect()));
        for (i, out) in next.iter_mut().enumerate() {
            *out = tap(&h, &cur, i);
        }
        core::mem::swap(&mut cur, &mut next);
    }
    if !keep_approx {
        cur.iter_mut().for_each(|v| *v = 0.0);
    }
    for j in (0..depth).rev() {
        let s = 1usize << j;
        let d = details[j].as_deref();
        for (i, out) in next.iter_mut().enumerate() {
            *out = (0..4)
                .filter(|t| i >= t * s)
                .map(|t| h[t] * cur[i - t * s] + d.map_or(0.0, |d| g[t] * d[i - t * s]))
                .sum();
        }
        core::mem::swap(&mut cur, &mut next);
    }
    Ok(cur[margin..margin + n].to_vec())
}

/// Smallest depth whose approximation band `[0, rate / 2^(L+1)]` lies
/// below `max_hz`.
pub fn baseline_depth(rate: f64, max_hz: f64) -> usize {
    let mut level = 1;
    while rate / (1u64 << (level + 1)) as f64 >= max_hz && level < 30 {
        level += 1;
    }
    level
}

/// Low-frequency baseline: the db2 approximation at `depth`, reconstructed
/// with every detail zeroed.
///
/// This uses the undecimated (stationary) transform. Its approximation
/// path is a linear time-invariant zero-phase filter with response
/// `prod_j |m0(2^j w)|^2`, whereas the decimated transform aliases part of
/// the cardiac band into the baseline.
pub fn baseline(x: &[f64], depth: usize) -> Result<Vec<f64>> {
    stationary_bands(x, depth, &|_| false, true)
}

/// Subtracts the db2 baseline whose band ends below [`BASELINE_MAX_HZ`].
pub fn ppg_baseline_remove(x: &RealSeries) -> Result<RealSeries> {
    let depth = baseline_depth(x.rate(), BASELINE_MAX_HZ);
    let base = baseline(x.samples(), depth)?;
    Ok(x.with_samples(x.samples().iter().zip(&base).map(|(v, b)| v - b).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CANONICAL_RATE;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn project(y: &[f64], basis: &[f64]) -> f64 {
        let num: f64 = y.iter().zip(basis).map(|(a, b)| a * b).sum();
        let den: f64 = basis.iter().map(|b| b * b).sum();
        num / den
    }

    #[test]
    fn db2_filter_is_orthonormal() {
        let h = DB2_LOW;
        let e: f64 = h.iter().map(|v| v * v).sum();
        assert!((e - 1.0).abs() < 1e-15);
        assert!((h[0] * h[2] + h[1] * h[3]).abs() < 1e-15);
        assert!((h.iter().sum::<f64>() - core::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn perfect_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1024usize, 1500, 4097, 10_909] {
            let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let s = RealSeries::new(x.clone(), CANONICAL_RATE).unwrap();
            let y = dwt_denoise(&s, &DenoiseBands::all(10)).unwrap();
            let err = y.samples().iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-8, "n={n} err={err}");
        }
    }

    #[test]
    fn constant_lives_in_the_approximation() {
        let s = RealSeries::new(vec![7.0; 3000], CANONICAL_RATE).unwrap();
        let y = dwt_denoise(&s, &DenoiseBands::default()).unwrap();
        assert!(y.samples().iter().all(|v| v.abs() < 1e-6 * 7.0));
    }

    #[test]
    fn keeps_cardiac_band_and_drops_drift() {
        let fs = CANONICAL_RATE;
        let n = 60 * 182;
        let tone: Vec<f64> = (0..n).map(|i| (2.0 * PI * 1.2 * i as f64 / fs).sin()).collect();
        let drift: Vec<f64> = (0..n).map(|i| (2.0 * PI * 0.05 * i as f64 / fs).sin()).collect();
        let x: Vec<f64> = tone.iter().zip(&drift).map(|(a, b)| a + b).collect();
        let y = dwt_denoise(&RealSeries::new(x, fs).unwrap(), &DenoiseBands::default()).unwrap();
        let interior = 1000..n - 1000;
        let amp = project(&y.samples()[interior.clone()], &tone[interior.clone()]);
        assert!((amp - 1.0).abs() < 0.2, "tone amplitude {amp}");
        let resid = project(&y.samples()[interior.clone()], &drift[interior]);
        assert!(resid.abs() < 0.1, "drift residual {resid}");
    }

    #[test]
    fn short_input_is_rejected() {
        let s = RealSeries::new(vec![0.0; 1023], CANONICAL_RATE).unwrap();
        assert_eq!(
            dwt_denoise(&s, &DenoiseBands::default()),
            Err(Error::InputTooShort { len: 1023, min: 1024 })
        );
    }

    #[test]
    fn baseline_depth_rule() {
        assert_eq!(baseline_depth(2500.0, 0.2), 13);
        assert!(2500.0 / (1u64 << 14) as f64 <= 0.2);
        assert_eq!(baseline_depth(250.0, 0.2), 10);
    }

    fn pulse_train(n: usize, fs: f64) -> Vec<f64> {
        // zero-mean band-limited stand-in for a PPG
        (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                (2.0 * PI * 1.1 * t).sin() + 0.4 * (2.0 * PI * 2.2 * t + 0.6).sin()
            })
            .collect()
    }

    #[test]
    fn baseline_removal_leaves_clean_signal_alone() {
        let fs = 2500.0;
        let n = 60 * 2500;
        let x = pulse_train(n, fs);
        let y = ppg_baseline_remove(&RealSeries::new(x.clone(), fs).unwrap()).unwrap();
        let (lo, hi) = x.iter().fold((f64::MAX, f64::MIN), |(l, h), v| (l.min(*v), h.max(*v)));
        let pp = hi - lo;
        // one transform block (2^13 samples) at each end carries the
        // mirror-extension transient
        let edge = 1 << baseline_depth(fs, BASELINE_MAX_HZ);
        let dev = y.samples()[edge..n - edge].iter().zip(&x[edge..]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(dev < 0.02 * pp, "max deviation {dev}");
        for w in y.samples().chunks_exact(25_000) {
            let mean = w.iter().sum::<f64>() / w.len() as f64;
            assert!(mean.abs() < 0.05 * pp, "window mean {mean}");
        }
    }

    #[test]
    fn baseline_removal_strips_slow_drift() {
        let fs = 2500.0;
        let n = 60 * 2500;
        let ppg = pulse_train(n, fs);
        let drift: Vec<f64> = (0..n).map(|i| 5.0 * (2.0 * PI * 0.05 * i as f64 / fs).sin()).collect();
        let x: Vec<f64> = ppg.iter().zip(&drift).map(|(a, b)| a + b).collect();
        let y = ppg_baseline_remove(&RealSeries::new(x, fs).unwrap()).unwrap();
        let a = project(y.samples(), &drift);
        // power of the drift component left in the output, relative to the original
        assert!(a * a < 0.01, "residual drift power fraction {}", a * a);

        let c = RealSeries::new(vec![3.0; 20_000], fs).unwrap();
        let y = ppg_baseline_remove(&c).unwrap();
        assert!(y.samples().iter().all(|v| v.abs() < 1e-9));
    }
}
