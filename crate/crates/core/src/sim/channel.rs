use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::series::{ComplexSeries, RealSeries};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Chest wall motion: the cardiac part follows the reference PPG shape
/// (mean removed, peak magnitude scaled to 1), the respiratory part is a
/// sinusoid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChestKinematics {
    /// Peak cardiac displacement, meters.
    pub cardiac_amp: f64,
    /// Respiratory displacement amplitude, meters.
    pub resp_amp: f64,
    /// Respiration rate, Hz.
    pub resp_rate: f64,
    pub ppg_source: RealSeries,
    shape: Vec<f64>,
}

impl ChestKinematics {
    pub fn new(ppg_source: RealSeries, cardiac_amp: f64, resp_amp: f64, resp_rate: f64) -> Result<Self> {
        for (name, v) in [("cardiac_amp", cardiac_amp), ("resp_amp", resp_amp), ("resp_rate", resp_rate)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidRange { name, value: v, range: "[0, inf)" });
            }
        }
        let s = ppg_source.samples();
        let shape = if s.is_empty() {
            Vec::new()
        } else {
            let mean = s.iter().sum::<f64>() / s.len() as f64;
            let peak = s.iter().map(|v| libm::fabs(v - mean)).fold(0.0, f64::max);
            let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
            s.iter().map(|v| (v - mean) * scale).collect()
        };
        Ok(Self { cardiac_amp, resp_amp, resp_rate, ppg_source, shape })
    }

    /// No motion at all.
    pub fn still() -> Self {
        Self::new(RealSeries::new(Vec::new(), 1.0).expect("unit rate"), 0.0, 0.0, 0.0).expect("zero amplitudes")
    }

    /// Normalized cardiac shape at `t` seconds, linearly interpolated and
    /// held at the ends.
    fn cardiac(&self, t: f64) -> f64 {
        let n = self.shape.len();
        if n == 0 {
            return 0.0;
        }
        let pos = (t * self.ppg_source.rate()).clamp(0.0, (n - 1) as f64);
        let i = libm::floor(pos) as usize;
        if i + 1 >= n {
            return self.shape[n - 1];
        }
        let f = pos - i as f64;
        self.shape[i] * (1.0 - f) + self.shape[i + 1] * f
    }

    /// Displacement `d(t)` in meters.
    pub fn displacement(&self, t: f64) -> f64 {
        let mut d = 0.0;
        if self.cardiac_amp > 0.0 {
            d += self.cardiac_amp * self.cardiac(t);
        }
        if self.resp_amp > 0.0 {
            d += self.resp_amp * libm::sin(2.0 * PI * self.resp_rate * t);
        }
        d
    }
}

/// One propagation path: complex gain and integer sample delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex64,
    pub delay: usize,
}

impl Path {
    pub fn new(gain: Complex64, delay: usize) -> Self {
        Self { gain, delay }
    }
}

/// Static multipath plus one chest reflection whose phase follows
/// `4 pi d(t) / wavelength`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub static_paths: Vec<Path>,
    pub chest: Path,
    /// Signal-to-noise ratio against the clean received power; `+inf`
    /// disables noise.
    pub noise_snr_db: f64,
    pub wavelength: f64,
    /// Rate the channel runs at, Hz.
    pub sample_rate: f64,
}

impl ChannelModel {
    pub fn new(static_paths: Vec<Path>, chest: Path, noise_snr_db: f64, wavelength: f64, sample_rate: f64) -> Result<Self> {
        if !(chest.gain.norm_sqr() > 0.0) {
            return Err(Error::InvalidArgument("chest path gain must be nonzero".into()));
        }
        if !(wavelength > 0.0) || !(sample_rate > 0.0) {
            return Err(Error::InvalidArgument("wavelength and sample rate must be positive".into()));
        }
        if noise_snr_db.is_nan() {
            return Err(Error::InvalidArgument("SNR is NaN".into()));
        }
        Ok(Self { static_paths, chest, noise_snr_db, wavelength, sample_rate })
    }

    /// Unit-gain, zero-delay chest path only, noiseless.
    pub fn identity(wavelength: f64, sample_rate: f64) -> Self {
        Self {
            static_paths: Vec::new(),
            chest: Path::new(Complex64::new(1.0, 0.0), 0),
            noise_snr_db: f64::INFINITY,
            wavelength,
            sample_rate,
        }
    }

    /// Chest-path phase for displacement `d`, radians.
    pub fn phase(&self, d: f64) -> f64 {
        4.0 * PI * d / self.wavelength
    }

    fn max_delay(&self) -> usize {
        self.static_paths.iter().map(|p| p.delay).chain([self.chest.delay]).max().unwrap_or(0)
    }
}

/// Streaming form of [`apply_channel`]: feed consecutive transmit blocks;
/// delays reach back into earlier blocks and the noise generator continues
/// across calls. Noise power is set per block from that block's clean
/// power.
#[derive(Debug, Clone)]
pub struct ChannelProcessor<'a> {
    chest: &'a ChestKinematics,
    model: &'a ChannelModel,
    history: Vec<Complex64>,
    consumed: usize,
    rng: ChaCha8Rng,
}

impl<'a> ChannelProcessor<'a> {
    pub fn new(chest: &'a ChestKinematics, model: &'a ChannelModel, seed: u64) -> Self {
        Self {
            chest,
            model,
            history: alloc::vec![Complex64::new(0.0, 0.0); model.max_delay()],
            consumed: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn process(&mut self, tx: &[Complex64]) -> Vec<Complex64> {
        let h = self.history.len();
        let delayed = |i: usize, d: usize| -> Complex64 {
            if d <= i {
                tx[i - d]
            } else {
                self.history[h + i - d]
            }
        };
        let rate = self.model.sample_rate;
        let mut out: Vec<Complex64> = (0..tx.len())
            .map(|i| {
                let mut y: Complex64 = self.model.static_paths.iter().map(|p| p.gain * delayed(i, p.delay)).sum();
                let t = (self.consumed + i) as f64 / rate;
                let phi = self.model.phase(self.chest.displacement(t));
                let rot = Complex64::new(libm::cos(phi), libm::sin(phi));
                y += self.model.chest.gain * rot * delayed(i, self.model.chest.delay);
                y
            })
            .collect();

        if self.model.noise_snr_db.is_finite() && !out.is_empty() {
            let power = out.iter().map(|v| v.norm_sqr()).sum::<f64>() / out.len() as f64;
            let sigma = libm::sqrt(power / libm::pow(10.0, self.model.noise_snr_db / 10.0) / 2.0);
            for v in &mut out {
                let re: f64 = StandardNormal.sample(&mut self.rng);
                let im: f64 = StandardNormal.sample(&mut self.rng);
                *v += Complex64::new(sigma * re, sigma * im);
            }
        }

        if h > 0 {
            let mut hist = Vec::with_capacity(h);
            let take = tx.len().min(h);
            hist.extend_from_slice(&self.history[take..]);
            hist.extend_from_slice(&tx[tx.len() - take..]);
            self.history = hist;
        }
        self.consumed += tx.len();
        out
    }
}

/// Passes `tx` through the static paths and the chest-modulated path and
/// adds complex white Gaussian noise at the model's SNR.
pub fn apply_channel(tx: &ComplexSeries, chest: &ChestKinematics, ch: &ChannelModel, seed: u64) -> Result<ComplexSeries> {
    if tx.rate() != ch.sample_rate {
        return Err(Error::RateMismatch { expected: ch.sample_rate, actual: tx.rate() });
    }
    let mut proc = ChannelProcessor::new(chest, ch, seed);
    ComplexSeries::new(proc.process(tx.samples()), tx.rate())
}
