//! Waveform comparison: correlation, peak-based heart rate, robust summaries.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Pearson correlation coefficient. Zero when either input is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), actual: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::EmptyInput { len: a.len(), min: 2 });
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(0.0);
    }
    Ok(sab / libm::sqrt(saa * sbb))
}

/// Local maxima above half the buffer maximum, at least `min_spacing_s`
/// apart. Taller peaks win when two are too close. Sorted by index.
pub fn find_peaks(x: &[f64], rate: f64, min_spacing_s: f64) -> Vec<usize> {
    if x.len() < 3 {
        return Vec::new();
    }
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Vec::new();
    }
    let thresh = 0.5 * max;
    let mut cand: Vec<usize> =
        (1..x.len() - 1).filter(|&i| x[i] > thresh && x[i] > x[i - 1] && x[i] >= x[i + 1]).collect();
    cand.sort_by(|&i, &j| x[j].total_cmp(&x[i]).then(i.cmp(&j)));
    let gap = libm::ceil(min_spacing_s * rate) as usize;
    let mut kept: Vec<usize> = Vec::new();
    for i in cand {
        if kept.iter().all(|&k| k.abs_diff(i) >= gap) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

/// Beats per minute from the mean peak interval; `None` below two peaks.
pub fn heart_rate(x: &[f64], rate: f64) -> Option<f64> {
    let p = find_peaks(x, rate, 0.3);
    if p.len() < 2 {
        return None;
    }
    let mean_interval = (p[p.len() - 1] - p[0]) as f64 / (p.len() - 1) as f64 / rate;
    Some(60.0 / mean_interval)
}

/// Linear-interpolation quantile of finite values, `q` in [0, 1].
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let i = libm::floor(pos) as usize;
    let f = pos - i as f64;
    Some(if i + 1 < v.len() { v[i] * (1.0 - f) + v[i + 1] * f } else { v[i] })
}

pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

/// Interquartile range.
pub fn iqr(values: &[f64]) -> Option<f64> {
    Some(quantile(values, 0.75)? - quantile(values, 0.25)?)
}
