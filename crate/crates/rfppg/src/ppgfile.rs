//! Text PPG files.
//!
//! ```text
//! # rate_hz=2500
//! 0,0.9731
//! 0.0004,0.9802
//! ```
//!
//! One `time_s,value` line per sample after the header. Sample `i` sits
//! at `i / rate`. Numbers are written as shortest round-trip decimals, so
//! reading a written file gives back the same bits.

use std::fmt::Write;
use std::path::Path;

use rfppg_core::RealSeries;

use crate::error::{read_text, write_bytes, CliError, CliResult};

/// Largest tolerated deviation of a time stamp from the uniform grid, s.
pub const TIME_TOL: f64 = 1e-6;

pub fn encode_ppg(x: &RealSeries) -> String {
    let mut out = String::with_capacity(24 * x.len() + 32);
    let _ = writeln!(out, "# rate_hz={}", x.rate());
    for (i, v) in x.samples().iter().enumerate() {
        let _ = writeln!(out, "{},{}", i as f64 / x.rate(), v);
    }
    out
}

/// Parses a PPG file; errors carry the 1-based line number.
pub fn decode_ppg(text: &str) -> Result<RealSeries, (usize, String)> {
    let mut lines = text.lines().enumerate();
    let rate = match lines.next() {
        Some((_, h)) => {
            let r = h
                .trim()
                .strip_prefix("# rate_hz=")
                .ok_or((1, "expected '# rate_hz=<r>' header".to_string()))?;
            r.trim().parse::<f64>().map_err(|_| (1, format!("bad rate '{r}'")))?
        }
        None => return Err((1, "empty file".into())),
    };
    if !(rate > 0.0 && rate.is_finite()) {
        return Err((1, format!("rate {rate} must be positive")));
    }
    let mut values = Vec::new();
    let mut t0 = 0.0;
    let mut prev = f64::NEG_INFINITY;
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let no = i + 1;
        let (t, v) = line.split_once(',').ok_or((no, "expected 'time,value'".to_string()))?;
        let t: f64 = t.trim().parse().map_err(|_| (no, format!("bad time '{t}'")))?;
        let v: f64 = v.trim().parse().map_err(|_| (no, format!("bad value '{v}'")))?;
        if !v.is_finite() || !t.is_finite() {
            return Err((no, "non-finite number".into()));
        }
        if !(t > prev) {
            return Err((no, format!("time {t} does not increase")));
        }
        if values.is_empty() {
            t0 = t;
        }
        let expected = t0 + values.len() as f64 / rate;
        if (t - expected).abs() > TIME_TOL {
            return Err((no, format!("time {t} is off the {rate} Hz grid (expected {expected})")));
        }
        prev = t;
        values.push(v);
    }
    RealSeries::new(values, rate).map_err(|e| (1, e.to_string()))
}

pub fn write_ppg(path: &Path, x: &RealSeries) -> CliResult<()> {
    write_bytes(path, encode_ppg(x).as_bytes())
}

pub fn read_ppg(path: &Path) -> CliResult<RealSeries> {
    decode_ppg(&read_text(path)?).map_err(|(line, msg)| CliError::format(path, format!("line {line}: {msg}")))
}
