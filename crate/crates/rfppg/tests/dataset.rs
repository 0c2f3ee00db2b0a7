mod common;

use rfppg::capture::{decode_raw_iq, read_capture};
use rfppg::dataset::{read_manifest, session_spec, write_record, MANIFEST_FILE};
use rfppg::ppgfile::read_ppg;
use rfppg::{cmd_simulate, RunConfig};
use rfppg_core::sim::{derive_seed, gen_qpsk_symbols, ofdm_demodulate, OfdmConfig};
use rfppg_core::ComplexSeries;

use common::files_of;

#[test]
fn default_layout_at_one_tenth_scale() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { scale: 0.1, ..RunConfig::default() };
    let m = cmd_simulate(&cfg, dir.path(), false).unwrap();
    assert_eq!(m.subjects.len(), 16);
    assert!(m.subjects.iter().all(|s| s.sessions.len() == 2));
    assert_eq!(m.duration_s, 30.0);
    let files = files_of(dir.path());
    let count = |ext: &str| files.iter().filter(|(n, _)| n.ends_with(ext)).count();
    assert_eq!((count(".rpg"), count(".ppg")), (32, 32));
    let first = &m.subjects[0].sessions[0];
    assert_eq!(first.record_id, "s01_1");
    let cap = read_capture(&dir.path().join(&first.capture)).unwrap();
    assert_eq!((cap.n_subcarriers(), cap.n_symbols()), (64, 7500));
    assert!((read_ppg(&dir.path().join(&first.ppg)).unwrap().duration() - 30.0).abs() < 1e-9);
    assert_eq!(read_manifest(dir.path()).unwrap(), m);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let cfg = RunConfig { subjects: 2, duration_s: 8.0, ..RunConfig::default() };
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    cmd_simulate(&cfg, a.path(), false).unwrap();
    cmd_simulate(&cfg, b.path(), false).unwrap();
    assert_eq!(files_of(a.path()), files_of(b.path()));
    cmd_simulate(&RunConfig { seed: 1, ..cfg }, c.path(), false).unwrap();
    assert_ne!(files_of(a.path()), files_of(c.path()));
}

#[test]
fn manifest_regenerates_each_record() {
    let cfg = RunConfig { subjects: 2, sessions: 2, duration_s: 6.0, seed: 77, ..RunConfig::default() };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    cmd_simulate(&cfg, a.path(), false).unwrap();
    let m = read_manifest(a.path()).unwrap();
    let rebuilt = RunConfig { seed: m.seed, duration_s: m.duration_s, snr_db: m.snr_db, ..RunConfig::default() };
    for s in &m.subjects {
        for e in &s.sessions {
            let spec = session_spec(&rebuilt, s.index, e.session);
            assert_eq!(spec.seed, e.seed);
            assert_eq!(spec.hr_bpm, e.hr_bpm);
            write_record(b.path(), &e.record_id, &spec, false).unwrap();
        }
    }
    let mut original = files_of(a.path());
    original.retain(|(n, _)| n.ends_with(".rpg") || n.ends_with(".ppg"));
    assert_eq!(original, files_of(b.path()));
    assert!(a.path().join(MANIFEST_FILE).exists());
}

#[test]
fn raw_iq_demodulates_to_the_stored_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { subjects: 1, sessions: 1, duration_s: 2.0, ..RunConfig::default() };
    let m = cmd_simulate(&cfg, dir.path(), true).unwrap();
    let e = &m.subjects[0].sessions[0];
    let (rate, iq) = decode_raw_iq(&std::fs::read(dir.path().join(e.raw_iq.as_ref().unwrap())).unwrap()).unwrap();
    let ofdm = OfdmConfig::default();
    assert_eq!(rate, ofdm.sample_rate);
    assert_eq!(iq.len(), 500 * ofdm.symbol_len());

    // The transmitter draws each one-second block of 250 symbols from its own seed.
    let spec = session_spec(&cfg, 1, 1);
    let cap = read_capture(&dir.path().join(&e.capture)).unwrap();
    for block in 0..2 {
        let tx = gen_qpsk_symbols(250, 64, derive_seed(spec.seed, 1000 + block as u64)).unwrap();
        let span = block * 250 * ofdm.symbol_len()..(block + 1) * 250 * ofdm.symbol_len();
        let est = ofdm_demodulate(&ComplexSeries::new(iq[span].to_vec(), rate).unwrap(), &tx, &ofdm).unwrap();
        for sc in 0..64 {
            for k in 0..250 {
                let d = (est.estimates.get(sc, k) - cap.estimates.get(sc, block * 250 + k)).norm();
                assert!(d < 1e-4, "subcarrier {sc} symbol {k}: {d}");
            }
        }
    }
}
