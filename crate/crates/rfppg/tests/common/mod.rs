#![allow(dead_code)]

use std::path::Path;

use rfppg::dataset::write_record;
use rfppg::RunConfig;
use rfppg_core::sim::RecordSpec;

/// Four subjects, two one-minute sessions each.
pub fn desk_config() -> RunConfig {
    RunConfig { subjects: 4, duration_s: 60.0, snr_db: 20.0, ..RunConfig::default() }
}

/// A small MLP so command tests stay quick.
pub fn tiny_mlp(cfg: &mut RunConfig, epochs: usize) {
    cfg.set("mlp_dims", "400,32,400").unwrap();
    cfg.set("epochs", &epochs.to_string()).unwrap();
    cfg.validate().unwrap();
}

/// Simulates one record with optional artifact centres into `dir`.
pub fn one_record(dir: &Path, id: &str, seed: u64, duration_s: f64, artifacts: &[f64]) {
    let mut spec = RecordSpec::synthetic(seed, duration_s, 20.0);
    spec.artifacts = artifacts.to_vec();
    write_record(dir, id, &spec, false).unwrap();
}

pub fn files_of(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}
