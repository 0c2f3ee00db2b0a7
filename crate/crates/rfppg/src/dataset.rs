//! Synthetic datasets on disk: capture/PPG file pairs plus `manifest.json`.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rfppg_core::sim::{simulate_record, RecordSpec};
use serde::{Deserialize, Serialize};

use crate::capture::{write_capture, RawIqWriter};
use crate::config::RunConfig;
use crate::error::{write_bytes, CliError, CliResult};
use crate::pool::map_ordered;
use crate::ppgfile::write_ppg;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "run.cfg";
pub const CAPTURE_EXT: &str = "rpg";
pub const PPG_EXT: &str = "ppg";
pub const RAW_IQ_EXT: &str = "riq";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub duration_s: f64,
    pub snr_db: f64,
    pub subjects: Vec<SubjectEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectEntry {
    pub id: String,
    pub index: u64,
    pub sessions: Vec<SessionEntry>,
}

/// One simulated recording and the parameters it was drawn with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEntry {
    pub record_id: String,
    pub session: u64,
    pub seed: u64,
    pub capture: String,
    pub ppg: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub raw_iq: Option<String>,
    pub hr_bpm: f64,
    pub hrv_pct: f64,
    pub resp_rate_hz: f64,
    pub cardiac_amp_m: f64,
    pub resp_amp_m: f64,
    pub ppg_delay_s: f64,
    pub snr_db: f64,
}

pub fn subject_id(subject: u64) -> String {
    format!("s{subject:02}")
}

pub fn record_id(subject: u64, session: u64) -> String {
    format!("{}_{session}", subject_id(subject))
}

/// Spec of session `session` (1-based) of subject `subject` (1-based).
pub fn session_spec(cfg: &RunConfig, subject: u64, session: u64) -> RecordSpec {
    RecordSpec::session(cfg.seed, subject, session, cfg.session_seconds(), cfg.snr_db)
}

/// Simulates `spec` and writes `<id>.rpg`, `<id>.ppg` and, with `raw_iq`,
/// `<id>.riq` into `dir`.
pub fn write_record(dir: &Path, id: &str, spec: &RecordSpec, raw_iq: bool) -> CliResult<SessionEntry> {
    let capture = format!("{id}.{CAPTURE_EXT}");
    let ppg = format!("{id}.{PPG_EXT}");
    let iq_name = raw_iq.then(|| format!("{id}.{RAW_IQ_EXT}"));
    let rec = match &iq_name {
        Some(name) => {
            let path = dir.join(name);
            let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
            let mut w = RawIqWriter::new(BufWriter::new(file), spec.ofdm.sample_rate).map_err(|e| CliError::io(&path, e))?;
            let mut sink = |b: &[Complex64]| w.push(b);
            let rec = simulate_record(spec, Some(&mut sink)).map_err(|e| CliError::core(id, e))?;
            w.finish().map_err(|e| CliError::io(&path, e))?;
            rec
        }
        None => simulate_record(spec, None).map_err(|e| CliError::core(id, e))?,
    };
    write_capture(&dir.join(&capture), &rec.estimates)?;
    write_ppg(&dir.join(&ppg), &rec.ppg_capture)?;
    Ok(SessionEntry {
        record_id: id.to_string(),
        session: 0,
        seed: spec.seed,
        capture,
        ppg,
        raw_iq: iq_name,
        hr_bpm: spec.hr_bpm,
        hrv_pct: spec.hrv_pct,
        resp_rate_hz: spec.resp_rate,
        cardiac_amp_m: spec.cardiac_amp,
        resp_amp_m: spec.resp_amp,
        ppg_delay_s: spec.ppg_delay_s,
        snr_db: spec.snr_db,
    })
}

/// Generates the whole dataset described by `cfg` into `out_dir`.
pub fn cmd_simulate(cfg: &RunConfig, out_dir: &Path, raw_iq: bool) -> CliResult<Manifest> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let jobs: Vec<(u64, u64)> =
        (1..=cfg.subjects as u64).flat_map(|s| (1..=cfg.sessions as u64).map(move |k| (s, k))).collect();
    let results = map_ordered(&jobs, |&(s, k)| {
        let mut e = write_record(out_dir, &record_id(s, k), &session_spec(cfg, s, k), raw_iq)?;
        e.session = k;
        Ok::<_, CliError>(e)
    });
    let mut subjects: Vec<SubjectEntry> = Vec::new();
    for (&(s, _), r) in jobs.iter().zip(results) {
        let entry = r?;
        match subjects.last_mut() {
            Some(last) if last.index == s => last.sessions.push(entry),
            _ => subjects.push(SubjectEntry { id: subject_id(s), index: s, sessions: vec![entry] }),
        }
    }
    let manifest = Manifest { seed: cfg.seed, duration_s: cfg.session_seconds(), snr_db: cfg.snr_db, subjects };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write_bytes(&out_dir.join(MANIFEST_FILE), json.as_bytes())?;
    write_bytes(&out_dir.join(CONFIG_FILE), cfg.to_text().as_bytes())?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> CliResult<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = crate::error::read_text(&path)?;
    serde_json::from_str(&text).map_err(|e| CliError::format(&path, e.to_string()))
}

/// A capture with its reference PPG, found by file stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordFiles {
    pub id: String,
    pub capture: PathBuf,
    pub ppg: PathBuf,
}

/// Every `*.rpg` in `dir`, sorted by record id, each with the `.ppg` of
/// the same stem.
pub fn list_records(dir: &Path) -> CliResult<Vec<RecordFiles>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some(CAPTURE_EXT) {
            continue;
        }
        let Some(id) = path.file_stem().and_then(|s| s.to_str()) else { continue };
        out.push(RecordFiles { id: id.to_string(), ppg: path.with_extension(PPG_EXT), capture: path.clone() });
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}
