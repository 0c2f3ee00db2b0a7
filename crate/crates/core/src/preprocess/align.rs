use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::series::Segment;

/// About half a second at the canonical rate.
pub const DEFAULT_MAX_LAG: usize = 91;

/// Scores closer than this are treated as equal.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// `shifted[n] = radio[(n + lag) mod L]`.
    pub shifted: Segment,
    /// Circular delay of the radio segment relative to the PPG, samples.
    pub lag: isize,
    /// Normalized inner product at `lag`.
    pub score: f64,
}

/// Exhaustive sweep of circular shifts in `[-max_lag, max_lag]`, keeping
/// the one with the largest normalized inner product against `ppg`. Ties
/// go to the smallest |lag|, negative before positive.
pub fn align_segments(radio: &Segment, ppg: &Segment, max_lag: usize) -> Result<Alignment> {
    let n = radio.len();
    if ppg.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: ppg.len() });
    }
    if n == 0 {
        return Err(Error::EmptyInput { len: 0, min: 1 });
    }
    if 2 * max_lag >= n {
        return Err(Error::InvalidArgument(alloc::format!("max_lag {max_lag} must be below half of {n}")));
    }
    let r = &radio.samples;
    let p = &ppg.samples;
    let norm = libm::sqrt(r.iter().map(|v| v * v).sum::<f64>() * p.iter().map(|v| v * v).sum::<f64>());
    let score = |lag: isize| -> f64 {
        if norm == 0.0 {
            return 0.0;
        }
        let k = lag.rem_euclid(n as isize) as usize;
        let dot: f64 = p[..n - k].iter().zip(&r[k..]).map(|(a, b)| a * b).sum::<f64>()
            + p[n - k..].iter().zip(&r[..k]).map(|(a, b)| a * b).sum::<f64>();
        dot / norm
    };
    let mut best = (0isize, score(0));
    for m in 1..=max_lag as isize {
        for lag in [-m, m] {
            let s = score(lag);
            if s > best.1 + TIE_TOL {
                best = (lag, s);
            }
        }
    }
    let k = best.0.rem_euclid(n as isize) as usize;
    let samples: Vec<f64> = (0..n).map(|i| r[(i + k) % n]).collect();
    Ok(Alignment {
        shifted: Segment { samples, origin_index: radio.origin_index, duration_s: radio.duration_s },
        lag: best.0,
        score: best.1,
    })
}
