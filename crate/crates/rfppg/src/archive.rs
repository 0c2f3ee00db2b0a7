//! Segment-pair archives written by `preprocess`.
//!
//! ```text
//! magic "RPA1", version u8 (1)
//! segment length L u32 LE, segment rate Hz f64 LE, pair count u32 LE
//! per pair:
//!   record id length u16 LE, record id UTF-8
//!   segment index u32 LE, lag i32 LE
//!   radio origin u64 LE, PPG origin u64 LE
//!   L radio samples f64 LE, L PPG samples f64 LE
//! ```
//!
//! Pairs are stored sorted by (record id, segment index).

use std::path::Path;

use rfppg_core::preprocess::SegmentPair;
use rfppg_core::Segment;

use crate::error::{read_bytes, write_bytes, CliError, CliResult};

pub const ARCHIVE_MAGIC: [u8; 4] = *b"RPA1";
pub const ARCHIVE_VERSION: u8 = 1;

/// Sorts pairs into archive order.
pub fn canonical_order(pairs: &mut [SegmentPair]) {
    pairs.sort_by(|a, b| a.record_id.cmp(&b.record_id).then(a.index.cmp(&b.index)));
}

pub fn encode_archive(pairs: &[SegmentPair], rate: f64) -> Result<Vec<u8>, String> {
    let len = pairs.first().map_or(0, |p| p.radio.len());
    let mut sorted = pairs.to_vec();
    canonical_order(&mut sorted);
    let mut out = Vec::with_capacity(17 + pairs.len() * (40 + 16 * len));
    out.extend_from_slice(&ARCHIVE_MAGIC);
    out.push(ARCHIVE_VERSION);
    out.extend_from_slice(&(len as u32).to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(sorted.len() as u32).to_le_bytes());
    for p in &sorted {
        if p.radio.len() != len || p.ppg.len() != len {
            return Err(format!("{} segment {} is not {len} samples long", p.record_id, p.index));
        }
        let id = p.record_id.as_bytes();
        let id_len = u16::try_from(id.len()).map_err(|_| format!("record id '{}' is too long", p.record_id))?;
        out.extend_from_slice(&id_len.to_le_bytes());
        out.extend_from_slice(id);
        out.extend_from_slice(&(p.index as u32).to_le_bytes());
        out.extend_from_slice(&(p.lag as i32).to_le_bytes());
        out.extend_from_slice(&(p.radio.origin_index as u64).to_le_bytes());
        out.extend_from_slice(&(p.ppg.origin_index as u64).to_le_bytes());
        for v in p.radio.samples.iter().chain(&p.ppg.samples) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    b: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.b.len()).ok_or_else(|| {
            format!("truncated at byte {} (need {n} more)", self.at)
        })?;
        let s = &self.b[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], String> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
}

/// Pairs and segment rate of an archive.
pub fn decode_archive(b: &[u8]) -> Result<(Vec<SegmentPair>, f64), String> {
    let mut r = Reader { b, at: 0 };
    if r.array::<4>()? != ARCHIVE_MAGIC {
        return Err("bad magic, expected RPA1".into());
    }
    let version = r.array::<1>()?[0];
    if version != ARCHIVE_VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let len = u32::from_le_bytes(r.array()?) as usize;
    let rate = f64::from_le_bytes(r.array()?);
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(format!("bad segment rate {rate}"));
    }
    let count = u32::from_le_bytes(r.array()?) as usize;
    let duration_s = len as f64 / rate;
    let samples = |r: &mut Reader| -> Result<Vec<f64>, String> {
        Ok(r.take(8 * len)?.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    };
    let mut pairs = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let id_len = u16::from_le_bytes(r.array()?) as usize;
        let record_id = std::str::from_utf8(r.take(id_len)?).map_err(|_| "record id is not UTF-8".to_string())?.to_string();
        let index = u32::from_le_bytes(r.array()?) as usize;
        let lag = i32::from_le_bytes(r.array()?) as isize;
        let radio_origin = u64::from_le_bytes(r.array()?) as usize;
        let ppg_origin = u64::from_le_bytes(r.array()?) as usize;
        let radio = Segment { samples: samples(&mut r)?, origin_index: radio_origin, duration_s };
        let ppg = Segment { samples: samples(&mut r)?, origin_index: ppg_origin, duration_s };
        pairs.push(SegmentPair { record_id, index, radio, ppg, lag });
    }
    if r.at != b.len() {
        return Err(format!("{} trailing bytes", b.len() - r.at));
    }
    Ok((pairs, rate))
}

pub fn write_archive(path: &Path, pairs: &[SegmentPair], rate: f64) -> CliResult<()> {
    let bytes = encode_archive(pairs, rate).map_err(|msg| CliError::format(path, msg))?;
    write_bytes(path, &bytes)
}

pub fn read_archive(path: &Path) -> CliResult<(Vec<SegmentPair>, f64)> {
    decode_archive(&read_bytes(path)?).map_err(|msg| CliError::format(path, msg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(id: &str, index: usize, lag: isize) -> SegmentPair {
        let seg = |k: f64| Segment {
            samples: (0..8).map(|i| (i as f64 * k).cos() / 7.0).collect(),
            origin_index: index * 8,
            duration_s: 8.0 / 3.0,
        };
        SegmentPair { record_id: id.into(), index, radio: seg(0.3), ppg: seg(1.1), lag }
    }

    #[test]
    fn round_trip_sorts_and_keeps_bits() {
        let pairs = vec![pair("s02_1", 0, 4), pair("s01_2", 3, -7), pair("s01_2", 1, 0)];
        let (back, rate) = decode_archive(&encode_archive(&pairs, 3.0).unwrap()).unwrap();
        assert_eq!(rate, 3.0);
        assert_eq!(back, vec![pairs[2].clone(), pairs[1].clone(), pairs[0].clone()]);
    }

    #[test]
    fn order_of_input_does_not_change_bytes() {
        let a = vec![pair("b", 1, 0), pair("a", 2, 1)];
        let b = vec![pair("a", 2, 1), pair("b", 1, 0)];
        assert_eq!(encode_archive(&a, 1.0).unwrap(), encode_archive(&b, 1.0).unwrap());
    }

    #[test]
    fn rejects_truncation_and_trailing_bytes() {
        let b = encode_archive(&[pair("x", 0, 0)], 1.0).unwrap();
        assert!(decode_archive(&b[..b.len() - 1]).unwrap_err().contains("truncated"));
        let mut long = b.clone();
        long.push(0);
        assert!(decode_archive(&long).unwrap_err().contains("trailing"));
        assert!(decode_archive(b"RPA2").is_err());
    }
}
