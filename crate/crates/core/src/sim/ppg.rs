use alloc::vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::series::RealSeries;

/// Dicrotic lobe amplitude relative to the systolic lobe.
pub const DICROTIC_RATIO: f64 = 0.35;
/// Dicrotic lobe delay as a fraction of the beat period.
pub const DICROTIC_DELAY: f64 = 0.35;
/// Lobe standard deviation as a fraction of the beat period.
const LOBE_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpgParams {
    pub hr_bpm: f64,
    /// Beat-interval jitter, percent of the mean period.
    pub hrv_pct: f64,
    pub duration_s: f64,
    pub rate: f64,
    pub seed: u64,
}

/// Synthetic PPG: per beat a Gaussian systolic lobe plus a smaller delayed
/// dicrotic lobe. The first systolic peak sits half a period into the
/// record; later intervals are jittered uniformly by `hrv_pct`.
pub fn gen_ppg_waveform(p: &PpgParams) -> Result<RealSeries> {
    if !(30.0..=200.0).contains(&p.hr_bpm) {
        return Err(Error::InvalidRange { name: "hr_bpm", value: p.hr_bpm, range: "[30, 200]" });
    }
    if !(0.0..=20.0).contains(&p.hrv_pct) {
        return Err(Error::InvalidRange { name: "hrv_pct", value: p.hrv_pct, range: "[0, 20]" });
    }
    if !(p.duration_s > 0.0 && p.duration_s.is_finite()) {
        return Err(Error::InvalidRange { name: "duration_s", value: p.duration_s, range: "(0, inf)" });
    }
    if !(p.rate > 0.0 && p.rate.is_finite()) {
        return Err(Error::InvalidRange { name: "rate", value: p.rate, range: "(0, inf)" });
    }
    let n = libm::round(p.duration_s * p.rate) as usize;
    let mut out = vec![0.0; n];
    let period = 60.0 / p.hr_bpm;
    let jitter = p.hrv_pct / 100.0;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let mut add_lobe = |center: f64, amp: f64, sigma: f64| {
        let lo = libm::ceil((center - 5.0 * sigma) * p.rate).max(0.0) as usize;
        let hi = (libm::floor((center + 5.0 * sigma) * p.rate) + 1.0).max(0.0) as usize;
        for (i, v) in out.iter_mut().enumerate().take(hi.min(n)).skip(lo) {
            let z = (i as f64 / p.rate - center) / sigma;
            *v += amp * libm::exp(-0.5 * z * z);
        }
    };

    // start one beat early so the record opens mid-diastole
    let mut beat_period = period;
    let mut center = -0.5 * period;
    while center - 5.0 * LOBE_WIDTH * beat_period < p.duration_s {
        let sigma = LOBE_WIDTH * beat_period;
        add_lobe(center, 1.0, sigma);
        add_lobe(center + DICROTIC_DELAY * beat_period, DICROTIC_RATIO, sigma);
        let u: f64 = rng.random::<f64>() * 2.0 - 1.0;
        beat_period = period * (1.0 + jitter * u);
        center += if center < 0.0 { period } else { beat_period };
    }
    RealSeries::new(out, p.rate)
}
