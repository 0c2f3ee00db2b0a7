//! Binary radio capture files.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "RPG1"
//! 4       1     format version (1)
//! 5       2     subcarrier count S, u16 LE
//! 7       8     symbol rate Hz, f64 LE
//! 15      8     record duration s, f64 LE
//! 23      ...   N symbols x S subcarriers x (re f32 LE, im f32 LE)
//! ```
//!
//! The payload holds one block per OFDM symbol; inside a block the
//! subcarriers follow each other in index order. The symbol count is the
//! payload length divided by `8 S`, and the header duration must equal
//! `N / rate` to within half a symbol.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rfppg_core::sim::{ComplexMatrix, SubcarrierMatrix};

use crate::error::{read_bytes, write_bytes, CliError, CliResult};

pub const CAPTURE_MAGIC: [u8; 4] = *b"RPG1";
pub const CAPTURE_VERSION: u8 = 1;
pub const CAPTURE_HEADER_LEN: usize = 23;

/// Raw baseband dumps written next to captures by `simulate --raw-iq`:
/// magic "RIQ1", version u8, sample rate f64 LE, then (re, im) f32 LE pairs.
pub const RAW_IQ_MAGIC: [u8; 4] = *b"RIQ1";
pub const RAW_IQ_HEADER_LEN: usize = 13;

pub fn encode_capture(m: &SubcarrierMatrix) -> Result<Vec<u8>, String> {
    let (s, n) = (m.n_subcarriers(), m.n_symbols());
    let s16 = u16::try_from(s).map_err(|_| format!("{s} subcarriers do not fit the header"))?;
    let mut out = Vec::with_capacity(CAPTURE_HEADER_LEN + 8 * s * n);
    out.extend_from_slice(&CAPTURE_MAGIC);
    out.push(CAPTURE_VERSION);
    out.extend_from_slice(&s16.to_le_bytes());
    out.extend_from_slice(&m.symbol_rate.to_le_bytes());
    out.extend_from_slice(&m.duration().to_le_bytes());
    for sym in 0..n {
        for sc in 0..s {
            let v = m.estimates.get(sc, sym);
            out.extend_from_slice(&(v.re as f32).to_le_bytes());
            out.extend_from_slice(&(v.im as f32).to_le_bytes());
        }
    }
    Ok(out)
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

fn f32_at(b: &[u8], at: usize) -> f32 {
    f32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode_capture(b: &[u8]) -> Result<SubcarrierMatrix, String> {
    if b.len() < CAPTURE_HEADER_LEN {
        return Err(format!("{} bytes is shorter than the {CAPTURE_HEADER_LEN}-byte header", b.len()));
    }
    if b[..4] != CAPTURE_MAGIC {
        return Err("bad magic, expected RPG1".into());
    }
    if b[4] != CAPTURE_VERSION {
        return Err(format!("unsupported version {}", b[4]));
    }
    let s = u16::from_le_bytes([b[5], b[6]]) as usize;
    let rate = f64_at(b, 7);
    let duration = f64_at(b, 15);
    if s == 0 {
        return Err("zero subcarriers".into());
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(format!("bad symbol rate {rate}"));
    }
    let payload = &b[CAPTURE_HEADER_LEN..];
    if payload.len() % (8 * s) != 0 {
        return Err(format!("payload of {} bytes is not a whole number of {s}-subcarrier symbols", payload.len()));
    }
    let n = payload.len() / (8 * s);
    if n == 0 {
        return Err("no symbols".into());
    }
    if !((duration - n as f64 / rate).abs() <= 0.5 / rate) {
        return Err(format!("header duration {duration} s disagrees with {n} symbols at {rate} Hz"));
    }
    let mut data = vec![Complex64::new(0.0, 0.0); s * n];
    for (sym, block) in payload.chunks_exact(8 * s).enumerate() {
        for sc in 0..s {
            let re = f32_at(block, 8 * sc) as f64;
            let im = f32_at(block, 8 * sc + 4) as f64;
            data[sc * n + sym] = Complex64::new(re, im);
        }
    }
    let estimates = ComplexMatrix::from_vec(s, n, data).map_err(|e| e.to_string())?;
    SubcarrierMatrix::new(estimates, rate).map_err(|e| e.to_string())
}

pub fn write_capture(path: &Path, m: &SubcarrierMatrix) -> CliResult<()> {
    let bytes = encode_capture(m).map_err(|msg| CliError::format(path, msg))?;
    write_bytes(path, &bytes)
}

pub fn read_capture(path: &Path) -> CliResult<SubcarrierMatrix> {
    decode_capture(&read_bytes(path)?).map_err(|msg| CliError::format(path, msg))
}

/// Streams baseband blocks into a raw IQ dump.
pub struct RawIqWriter<W: Write> {
    inner: W,
    error: Option<std::io::Error>,
}

impl<W: Write> RawIqWriter<W> {
    pub fn new(mut inner: W, sample_rate: f64) -> std::io::Result<Self> {
        inner.write_all(&RAW_IQ_MAGIC)?;
        inner.write_all(&[1])?;
        inner.write_all(&sample_rate.to_le_bytes())?;
        Ok(Self { inner, error: None })
    }

    /// Appends samples; the first IO error is kept and later calls do nothing.
    pub fn push(&mut self, block: &[Complex64]) {
        if self.error.is_some() {
            return;
        }
        let mut buf = Vec::with_capacity(8 * block.len());
        for v in block {
            buf.extend_from_slice(&(v.re as f32).to_le_bytes());
            buf.extend_from_slice(&(v.im as f32).to_le_bytes());
        }
        if let Err(e) = self.inner.write_all(&buf) {
            self.error = Some(e);
        }
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Sample rate and samples of a raw IQ dump.
pub fn decode_raw_iq(b: &[u8]) -> Result<(f64, Vec<Complex64>), String> {
    if b.len() < RAW_IQ_HEADER_LEN || b[..4] != RAW_IQ_MAGIC || b[4] != 1 {
        return Err("not a version 1 RIQ1 file".into());
    }
    let payload = &b[RAW_IQ_HEADER_LEN..];
    if payload.len() % 8 != 0 {
        return Err("truncated sample".into());
    }
    let samples = payload
        .chunks_exact(8)
        .map(|c| Complex64::new(f32_at(c, 0) as f64, f32_at(c, 4) as f64))
        .collect();
    Ok((f64_at(b, 5), samples))
}
