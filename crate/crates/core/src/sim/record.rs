use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::series::RealSeries;
use crate::sim::{
    gen_ppg_waveform, gen_qpsk_symbols, ofdm_demodulate, ofdm_modulate, ChannelModel, ChannelProcessor,
    ChestKinematics, ComplexMatrix, OfdmConfig, Path, PpgParams, SubcarrierMatrix,
};

/// Rate of the simulated reference PPG, Hz.
pub const PPG_RATE: f64 = 2500.0;

/// Symbols simulated per block; one second at the default link.
const BLOCK_SYMBOLS: usize = 250;

/// Mixes a tag into a base seed (SplitMix64 finalizer).
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Everything needed to simulate one paired recording.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordSpec {
    pub ofdm: OfdmConfig,
    pub duration_s: f64,
    pub hr_bpm: f64,
    pub hrv_pct: f64,
    /// Peak cardiac chest displacement, meters.
    pub cardiac_amp: f64,
    /// Respiratory displacement amplitude, meters.
    pub resp_amp: f64,
    pub resp_rate: f64,
    pub static_paths: Vec<Path>,
    pub chest: Path,
    pub snr_db: f64,
    /// How far the finger PPG trails the chest motion, seconds.
    pub ppg_delay_s: f64,
    /// Slow additive wander on the PPG capture (amplitude, Hz).
    pub ppg_drift: (f64, f64),
    /// White noise standard deviation on the PPG capture.
    pub ppg_noise: f64,
    /// Centres (seconds) of motion-artifact bursts injected into the PPG capture.
    pub artifacts: Vec<f64>,
    pub artifact_amp: f64,
    pub seed: u64,
}

impl RecordSpec {
    /// Randomized subject and room: heart rate 55-95 bpm, 2-6 % beat
    /// jitter, respiration 0.2-0.3 Hz, PPG lag 50-250 ms. The static
    /// reflection (gain 0.8) and the chest path (gain 0.3) get a random
    /// common phase and a relative angle near -90 degrees, which makes the
    /// channel magnitude rise with displacement toward the antenna.
    pub fn synthetic(seed: u64, duration_s: f64, snr_db: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5EC));
        let hr_bpm = rng.random_range(55.0..95.0);
        let hrv_pct = rng.random_range(2.0..6.0);
        let resp_rate = rng.random_range(0.2..0.3);
        let psi = rng.random_range(-PI..PI);
        let theta = rng.random_range(-0.55 * PI..-0.45 * PI);
        let ppg_delay_s = rng.random_range(0.05..0.25);
        let drift_hz = rng.random_range(0.03..0.07);
        Self {
            ofdm: OfdmConfig::default(),
            duration_s,
            hr_bpm,
            hrv_pct,
            cardiac_amp: 0.5e-3,
            resp_amp: 5e-3,
            resp_rate,
            static_paths: alloc::vec![Path::new(Complex64::from_polar(0.8, psi), 0)],
            chest: Path::new(Complex64::from_polar(0.3, psi + theta), 0),
            snr_db,
            ppg_delay_s,
            ppg_drift: (0.3, drift_hz),
            ppg_noise: 0.01,
            artifacts: Vec::new(),
            artifact_amp: 10.0,
            seed,
        }
    }

    /// Session `session` of synthetic subject `subject` in the dataset drawn
    /// from `dataset_seed`. Resting heart rate (58-90 bpm), beat jitter and
    /// breathing rate belong to the subject; each session shifts the heart
    /// rate by up to 3 bpm and gets its own room geometry, PPG lag and noise.
    pub fn session(dataset_seed: u64, subject: u64, session: u64, duration_s: f64, snr_db: f64) -> Self {
        let subject_seed = derive_seed(dataset_seed, subject);
        let mut spec = Self::synthetic(derive_seed(subject_seed, 0x5E55_0000 + session), duration_s, snr_db);
        let mut rng = ChaCha8Rng::seed_from_u64(subject_seed);
        let resting = rng.random_range(58.0..90.0);
        spec.hrv_pct = rng.random_range(2.0..6.0);
        spec.resp_rate = rng.random_range(0.2..0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 0x5E55));
        spec.hr_bpm = resting + rng.random_range(-3.0..3.0);
        spec
    }

    pub fn n_symbols(&self) -> usize {
        libm::round(self.duration_s * self.ofdm.symbol_rate()) as usize
    }

    pub fn channel(&self) -> Result<ChannelModel> {
        ChannelModel::new(
            self.static_paths.clone(),
            self.chest,
            self.snr_db,
            self.ofdm.wavelength(),
            self.ofdm.sample_rate,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedRecord {
    /// 64 x N channel estimates at the symbol rate.
    pub estimates: SubcarrierMatrix,
    /// Reference PPG as a sensor would report it: drift, noise, artifacts.
    pub ppg_capture: RealSeries,
    /// Clean PPG on the capture timeline.
    pub ppg_truth: RealSeries,
}

/// Simulates one record in one-second blocks. The transmitter draws fresh
/// QPSK per block, the channel keeps its state across blocks, and each
/// block is demodulated against its known symbols. `raw_iq`, when given,
/// receives every block of received baseband samples in order.
pub fn simulate_record(spec: &RecordSpec, mut raw_iq: Option<&mut dyn FnMut(&[Complex64])>) -> Result<SimulatedRecord> {
    spec.ofdm.validate()?;
    if !(spec.duration_s > 0.0) {
        return Err(Error::InvalidRange { name: "duration_s", value: spec.duration_s, range: "(0, inf)" });
    }
    if !(spec.ppg_delay_s >= 0.0) {
        return Err(Error::InvalidRange { name: "ppg_delay_s", value: spec.ppg_delay_s, range: "[0, inf)" });
    }
    let n_ppg = libm::round(spec.duration_s * PPG_RATE) as usize;
    let lead = libm::round(spec.ppg_delay_s * PPG_RATE) as usize;
    let wave = gen_ppg_waveform(&PpgParams {
        hr_bpm: spec.hr_bpm,
        hrv_pct: spec.hrv_pct,
        duration_s: (n_ppg + lead) as f64 / PPG_RATE,
        rate: PPG_RATE,
        seed: derive_seed(spec.seed, 1),
    })?;
    let wave = wave.into_samples();
    let truth = RealSeries::new(wave[..n_ppg].to_vec(), PPG_RATE)?;
    let chest_source = RealSeries::new(wave[lead..].to_vec(), PPG_RATE)?;

    let chest = ChestKinematics::new(chest_source, spec.cardiac_amp, spec.resp_amp, spec.resp_rate)?;
    let model = spec.channel()?;
    let mut channel = ChannelProcessor::new(&chest, &model, derive_seed(spec.seed, 2));

    let n_sym = spec.n_symbols();
    let n_sc = spec.ofdm.n_subcarriers;
    let mut est = Vec::with_capacity(n_sym * n_sc);
    let mut block = 0u64;
    let mut done = 0;
    let mut columns: Vec<ComplexMatrix> = Vec::new();
    while done < n_sym {
        let m = BLOCK_SYMBOLS.min(n_sym - done);
        let symbols = gen_qpsk_symbols(m, n_sc, derive_seed(spec.seed, 1000 + block))?;
        let tx = ofdm_modulate(&symbols, &spec.ofdm)?;
        let rx = crate::series::ComplexSeries::new(channel.process(tx.samples()), spec.ofdm.sample_rate)?;
        if let Some(sink) = raw_iq.as_mut() {
            sink(rx.samples());
        }
        columns.push(ofdm_demodulate(&rx, &symbols, &spec.ofdm)?.estimates);
        done += m;
        block += 1;
    }
    for k in 0..n_sc {
        for c in &columns {
            est.extend_from_slice(c.row(k));
        }
    }
    let estimates = SubcarrierMatrix::new(ComplexMatrix::from_vec(n_sc, n_sym, est)?, spec.ofdm.symbol_rate())?;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 3));
    let (drift_amp, drift_hz) = spec.ppg_drift;
    let burst_sigma = 0.02;
    let capture: Vec<f64> = truth
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let t = i as f64 / PPG_RATE;
            let noise: f64 = StandardNormal.sample(&mut rng);
            let mut x = 1.0 + v + drift_amp * libm::sin(2.0 * PI * drift_hz * t) + spec.ppg_noise * noise;
            for &c in &spec.artifacts {
                let z = (t - c) / burst_sigma;
                if libm::fabs(z) < 8.0 {
                    x += spec.artifact_amp * libm::exp(-0.5 * z * z);
                }
            }
            x
        })
        .collect();

    Ok(SimulatedRecord { estimates, ppg_capture: RealSeries::new(capture, PPG_RATE)?, ppg_truth: truth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let spec = RecordSpec::synthetic(7, 2.5, 20.0);
        let a = simulate_record(&spec, None).unwrap();
        assert_eq!(a.estimates.n_subcarriers(), 64);
        assert_eq!(a.estimates.n_symbols(), 625);
        assert_eq!(a.estimates.symbol_rate, 250.0);
        assert_eq!(a.ppg_capture.len(), 6250);
        assert_eq!(a, simulate_record(&spec, None).unwrap());
        assert_ne!(a, simulate_record(&RecordSpec::synthetic(8, 2.5, 20.0), None).unwrap());
    }

    #[test]
    fn sessions_share_subject_traits() {
        let a = RecordSpec::session(5, 0, 0, 10.0, 20.0);
        let b = RecordSpec::session(5, 0, 1, 10.0, 20.0);
        let c = RecordSpec::session(5, 1, 0, 10.0, 20.0);
        assert_eq!((a.resp_rate, a.hrv_pct), (b.resp_rate, b.hrv_pct));
        assert!((a.hr_bpm - b.hr_bpm).abs() <= 6.0);
        assert_ne!(a.seed, b.seed);
        assert_ne!(a.resp_rate, c.resp_rate);
        assert_eq!(a, RecordSpec::session(5, 0, 0, 10.0, 20.0));
    }

    #[test]
    fn raw_iq_sink_sees_every_sample() {
        let spec = RecordSpec::synthetic(1, 1.5, 20.0);
        let mut n = 0usize;
        let mut sink = |s: &[Complex64]| n += s.len();
        simulate_record(&spec, Some(&mut sink)).unwrap();
        assert_eq!(n, 375 * 80);
    }

    #[test]
    fn noiseless_estimates_follow_the_two_path_model() {
        let mut spec = RecordSpec::synthetic(3, 2.0, f64::INFINITY);
        spec.resp_amp = 0.0;
        spec.cardiac_amp = 0.0;
        let r = simulate_record(&spec, None).unwrap();
        let want = spec.static_paths[0].gain + spec.chest.gain;
        assert!(r.estimates.estimates.data().iter().all(|h| (h - want).norm() < 1e-9));
    }

    #[test]
    fn artifacts_land_in_the_capture() {
        let mut spec = RecordSpec::synthetic(4, 4.0, 20.0);
        let clean = simulate_record(&spec, None).unwrap();
        spec.artifacts = alloc::vec![2.0];
        let dirty = simulate_record(&spec, None).unwrap();
        let i = 5000;
        assert!((dirty.ppg_capture.samples()[i] - clean.ppg_capture.samples()[i] - 10.0).abs() < 1e-9);
        assert_eq!(dirty.ppg_capture.samples()[100], clean.ppg_capture.samples()[100]);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
