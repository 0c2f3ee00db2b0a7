use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::series::ComplexSeries;
use crate::sim::channel::SPEED_OF_LIGHT;

/// Link parameters of the OFDM transmitter. QPSK on every subcarrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    pub cp_len: usize,
    /// Baseband sample rate, Hz.
    pub sample_rate: f64,
    /// Carrier frequency, Hz.
    pub center_freq: f64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self { n_subcarriers: 64, cp_len: 16, sample_rate: 20_000.0, center_freq: 5.24e9 }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 || self.cp_len >= self.n_subcarriers {
            return Err(Error::InvalidArgument(alloc::format!(
                "cyclic prefix {} must be shorter than {} subcarriers",
                self.cp_len,
                self.n_subcarriers
            )));
        }
        if !(self.sample_rate > 0.0 && self.center_freq > 0.0) {
            return Err(Error::InvalidArgument("rates must be positive".into()));
        }
        Ok(())
    }

    /// Samples per OFDM symbol including the prefix.
    pub fn symbol_len(&self) -> usize {
        self.n_subcarriers + self.cp_len
    }

    /// OFDM symbols per second (250 for the default link).
    pub fn symbol_rate(&self) -> f64 {
        self.sample_rate / self.symbol_len() as f64
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.center_freq
    }
}

/// Row-major complex matrix; rows are subcarriers, columns OFDM symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
}

/// Per-symbol channel estimates sampled at the OFDM symbol rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierMatrix {
    pub estimates: ComplexMatrix,
    pub symbol_rate: f64,
}

impl SubcarrierMatrix {
    pub fn new(estimates: ComplexMatrix, symbol_rate: f64) -> Result<Self> {
        if !(symbol_rate > 0.0 && symbol_rate.is_finite()) {
            return Err(Error::InvalidRange { name: "symbol_rate", value: symbol_rate, range: "(0, inf)" });
        }
        if estimates.data().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite channel estimate".into()));
        }
        Ok(Self { estimates, symbol_rate })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.estimates.rows()
    }

    pub fn n_symbols(&self) -> usize {
        self.estimates.cols()
    }

    pub fn duration(&self) -> f64 {
        self.n_symbols() as f64 / self.symbol_rate
    }
}

/// Random QPSK symbols `(+-1 +- j)/sqrt(2)`, `n_subcarriers x n_symbols`.
pub fn gen_qpsk_symbols(n_symbols: usize, n_subcarriers: usize, seed: u64) -> Result<ComplexMatrix> {
    if n_symbols == 0 || n_subcarriers == 0 {
        return Err(Error::InvalidArgument("need at least one symbol and subcarrier".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = core::f64::consts::FRAC_1_SQRT_2;
    Ok(ComplexMatrix::from_fn(n_subcarriers, n_symbols, |_, _| {
        let bits: u8 = rng.random();
        Complex64::new(if bits & 1 == 0 { a } else { -a }, if bits & 2 == 0 { a } else { -a })
    }))
}

fn check_rows(symbols: &ComplexMatrix, cfg: &OfdmConfig) -> Result<()> {
    if symbols.rows() != cfg.n_subcarriers {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} symbol rows for {} subcarriers",
            symbols.rows(),
            cfg.n_subcarriers
        )));
    }
    Ok(())
}

/// Inverse DFT of every symbol column (with the `1/N` factor), prefixed by
/// its last `cp_len` samples.
pub fn ofdm_modulate(symbols: &ComplexMatrix, cfg: &OfdmConfig) -> Result<ComplexSeries> {
    cfg.validate()?;
    check_rows(symbols, cfg)?;
    let (n, cp) = (cfg.n_subcarriers, cfg.cp_len);
    let fft = Fft::new(n);
    let mut out = Vec::with_capacity(symbols.cols() * cfg.symbol_len());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for m in 0..symbols.cols() {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = symbols.get(k, m);
        }
        fft.inverse(&mut buf);
        out.extend_from_slice(&buf[n - cp..]);
        out.extend_from_slice(&buf);
    }
    ComplexSeries::new(out, cfg.sample_rate)
}

/// Drops each prefix, takes the forward DFT and divides by the known
/// transmitted symbol, giving one channel estimate per subcarrier and
/// symbol.
pub fn ofdm_demodulate(rx: &ComplexSeries, tx_symbols: &ComplexMatrix, cfg: &OfdmConfig) -> Result<SubcarrierMatrix> {
    cfg.validate()?;
    check_rows(tx_symbols, cfg)?;
    if rx.rate() != cfg.sample_rate {
        return Err(Error::RateMismatch { expected: cfg.sample_rate, actual: rx.rate() });
    }
    let (n, cp, len) = (cfg.n_subcarriers, cfg.cp_len, cfg.symbol_len());
    let n_sym = tx_symbols.cols();
    if rx.len() != n_sym * len {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} received samples for {n_sym} symbols of {len}",
            rx.len()
        )));
    }
    let fft = Fft::new(n);
    let mut est = ComplexMatrix::zeros(n, n_sym);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for m in 0..n_sym {
        let start = m * len + cp;
        buf.copy_from_slice(&rx.samples()[start..start + n]);
        fft.forward(&mut buf);
        for (k, y) in buf.iter().enumerate() {
            est.set(k, m, y / tx_symbols.get(k, m));
        }
    }
    SubcarrierMatrix::new(est, cfg.symbol_rate())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_link_timing() {
        let cfg = OfdmConfig::default();
        assert_eq!(cfg.symbol_len(), 80);
        assert_eq!(cfg.symbol_rate(), 250.0);
        assert!((cfg.wavelength() - 0.0572).abs() < 1e-3);
    }

    #[test]
    fn qpsk_constellation() {
        let s = gen_qpsk_symbols(1000, 64, 1).unwrap();
        assert!(s.data().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        assert!(s.data().iter().all(|v| v.re.abs() == v.im.abs()));
        assert_eq!(s, gen_qpsk_symbols(1000, 64, 1).unwrap());
        assert_ne!(s, gen_qpsk_symbols(1000, 64, 2).unwrap());
    }

    #[test]
    fn qpsk_points_are_equiprobable() {
        let s = gen_qpsk_symbols(15_625, 64, 99).unwrap();
        let mut counts = [0usize; 4];
        for v in s.data() {
            counts[(v.re < 0.0) as usize + 2 * (v.im < 0.0) as usize] += 1;
        }
        let total = s.data().len() as f64;
        assert_eq!(total, 1e6);
        for c in counts {
            assert!((c as f64 / total - 0.25).abs() < 0.005);
        }
    }

    #[test]
    fn dc_subcarrier_gives_flat_symbol() {
        let cfg = OfdmConfig::default();
        let mut s = ComplexMatrix::zeros(64, 1);
        s.set(0, 0, Complex64::new(1.0, 0.0));
        let x = ofdm_modulate(&s, &cfg).unwrap();
        assert_eq!(x.len(), 80);
        assert!(x.samples().iter().all(|v| (v - Complex64::new(1.0 / 64.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn prefix_copies_symbol_tail_and_timing() {
        let cfg = OfdmConfig::default();
        let s = gen_qpsk_symbols(250, 64, 3).unwrap();
        let x = ofdm_modulate(&s, &cfg).unwrap();
        assert_eq!(x.len(), 250 * 80);
        assert!((x.duration() - 1.0).abs() < 1e-12);
        for m in 0..250 {
            let sym = &x.samples()[m * 80..(m + 1) * 80];
            assert_eq!(&sym[..16], &sym[64..]);
        }
    }

    #[test]
    fn symbol_energy_is_conserved() {
        let cfg = OfdmConfig::default();
        let s = gen_qpsk_symbols(20, 64, 4).unwrap();
        let x = ofdm_modulate(&s, &cfg).unwrap();
        for m in 0..20 {
            let time: f64 = x.samples()[m * 80 + 16..(m + 1) * 80].iter().map(|v| v.norm_sqr()).sum();
            let freq: f64 = (0..64).map(|k| s.get(k, m).norm_sqr()).sum();
            assert!((time * 64.0 - freq).abs() < 1e-9 * freq);
        }
    }

    #[test]
    fn loopback_estimates_are_unity() {
        let cfg = OfdmConfig::default();
        let s = gen_qpsk_symbols(100, 64, 5).unwrap();
        let x = ofdm_modulate(&s, &cfg).unwrap();
        let h = ofdm_demodulate(&x, &s, &cfg).unwrap();
        assert_eq!((h.n_subcarriers(), h.n_symbols()), (64, 100));
        assert_eq!(h.symbol_rate, 250.0);
        assert!(h.estimates.data().iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-9));
    }

    #[test]
    fn shape_errors() {
        let cfg = OfdmConfig::default();
        let s = gen_qpsk_symbols(2, 32, 5).unwrap();
        assert!(matches!(ofdm_modulate(&s, &cfg), Err(Error::ShapeMismatch(_))));
        let s = gen_qpsk_symbols(2, 64, 5).unwrap();
        let x = ofdm_modulate(&s, &cfg).unwrap();
        let short = ComplexSeries::new(x.samples()[..100].to_vec(), 20_000.0).unwrap();
        assert!(matches!(ofdm_demodulate(&short, &s, &cfg), Err(Error::ShapeMismatch(_))));
    }
}
