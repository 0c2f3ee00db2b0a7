mod common;

use std::path::Path;

use rfppg::archive::{read_archive, write_archive};
use rfppg::commands::{history_path, load_model, split, METRICS_FILE, WAVEFORMS_FILE};
use rfppg::ppgfile::read_ppg;
use rfppg::{cmd_eval, cmd_preprocess, cmd_simulate, cmd_train, cmd_translate, CliError, ModelKind, RunConfig};
use rfppg_core::preprocess::SegmentPair;
use rfppg_core::regress::{write_model, MlpModel, Regressor, RidgeModel};
use rfppg_core::{Error, Segment, CANONICAL_RATE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{one_record, tiny_mlp};

fn core_error(e: &CliError) -> &Error {
    e.core_error().unwrap_or_else(|| panic!("not a pipeline error: {e}"))
}

#[test]
fn five_minute_record_gives_136_pairs() {
    let dir = tempfile::tempdir().unwrap();
    one_record(dir.path(), "clean", 11, 300.0, &[]);
    let out = dir.path().join("pairs.rpa");
    let s = cmd_preprocess(&RunConfig::default(), dir.path(), &out).unwrap();
    assert_eq!(s.pairs, 136);
    assert_eq!((s.records[0].pairs, s.records[0].flagged), (136, 0));
    let (pairs, rate) = read_archive(&out).unwrap();
    assert_eq!((pairs.len(), rate), (136, CANONICAL_RATE));
    assert!(pairs.iter().all(|p| p.radio.len() == 400 && p.ppg.len() == 400));
}

#[test]
fn one_artifact_window_is_dropped() {
    let dir = tempfile::tempdir().unwrap();
    // Centre of segment window 45 (99.0 s to 101.2 s).
    one_record(dir.path(), "burst", 12, 300.0, &[100.1]);
    let s = cmd_preprocess(&RunConfig::default(), dir.path(), &dir.path().join("pairs.rpa")).unwrap();
    assert_eq!((s.pairs, s.records[0].flagged), (135, 1));
    let (pairs, _) = read_archive(&dir.path().join("pairs.rpa")).unwrap();
    assert!(pairs.iter().all(|p| p.index != 45));
}

#[test]
fn empty_directory_is_an_empty_result() {
    let dir = tempfile::tempdir().unwrap();
    let e = cmd_preprocess(&RunConfig::default(), dir.path(), &dir.path().join("pairs.rpa")).unwrap_err();
    assert_eq!(core_error(&e), &Error::EmptyResult);
}

#[test]
fn bad_records_are_skipped_with_their_path() {
    let dir = tempfile::tempdir().unwrap();
    one_record(dir.path(), "good", 13, 20.0, &[]);
    std::fs::write(dir.path().join("broken.rpg"), b"RPG1 not really").unwrap();
    std::fs::write(dir.path().join("broken.ppg"), b"# rate_hz=2500\n").unwrap();
    one_record(dir.path(), "orphan", 14, 20.0, &[]);
    std::fs::remove_file(dir.path().join("orphan.ppg")).unwrap();
    let s = cmd_preprocess(&RunConfig::default(), dir.path(), &dir.path().join("pairs.rpa")).unwrap();
    assert_eq!(s.records.len(), 1);
    assert_eq!(s.pairs, 9);
    let failed: Vec<&str> = s.failures.iter().map(|(id, _)| id.as_str()).collect();
    assert_eq!(failed, ["broken", "orphan"]);
    assert!(s.failures[0].1.to_string().contains("broken.rpg"));
    assert!(s.failures[1].1.to_string().contains("orphan.ppg"));
}

/// Preprocessed desk-size dataset shared by the train/eval tests.
fn desk_pairs(dir: &Path) -> (RunConfig, std::path::PathBuf) {
    let cfg = RunConfig { subjects: 2, duration_s: 30.0, ..RunConfig::default() };
    cmd_simulate(&cfg, &dir.join("data"), false).unwrap();
    let pairs = dir.join("pairs.rpa");
    cmd_preprocess(&cfg, &dir.join("data"), &pairs).unwrap();
    (cfg, pairs)
}

#[test]
fn training_histories_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (mut cfg, pairs) = desk_pairs(dir.path());

    let ridge = dir.path().join("ridge.model");
    let s = cmd_train(&cfg, &pairs, ModelKind::Ridge, &ridge).unwrap();
    assert_eq!(s.history.len(), 1);
    let rows = std::fs::read_to_string(history_path(&ridge)).unwrap();
    assert_eq!(rows.lines().count(), 2);
    assert_eq!(rows.lines().next(), Some("epoch,train_mae,val_mae"));
    assert!(matches!(load_model(&ridge).unwrap(), Regressor::Ridge(_)));

    tiny_mlp(&mut cfg, 12);
    let (a, b) = (dir.path().join("a.model"), dir.path().join("b.model"));
    let s = cmd_train(&cfg, &pairs, ModelKind::Mlp, &a).unwrap();
    assert!(s.history.len() <= 12);
    let csv = std::fs::read_to_string(history_path(&a)).unwrap();
    assert_eq!(csv.lines().count(), s.history.len() + 1);
    cmd_train(&cfg, &pairs, ModelKind::Mlp, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(history_path(&a)).unwrap(), std::fs::read(history_path(&b)).unwrap());

    cfg.train_seed = Some(99);
    cmd_train(&cfg, &pairs, ModelKind::Mlp, &b).unwrap();
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn early_stopping_caps_the_history() {
    let dir = tempfile::tempdir().unwrap();
    let (mut cfg, pairs) = desk_pairs(dir.path());
    tiny_mlp(&mut cfg, 400);
    cfg.set("learning_rate", "3e-2").unwrap();
    cfg.set("patience", "3").unwrap();
    let s = cmd_train(&cfg, &pairs, ModelKind::Mlp, &dir.path().join("m.model")).unwrap();
    assert!(s.history.len() < 400);
    assert_eq!(s.history.len(), s.best_epoch + 3);
}

fn random_pairs(n: usize, seed: u64, radio_is_ppg: bool) -> Vec<SegmentPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seg = |k: usize| Segment {
        samples: (0..400).map(|i| (i as f64 * 0.21).sin() + rng.random_range(-0.5..0.5)).collect(),
        origin_index: k * 400,
        duration_s: 2.2,
    };
    (0..n)
        .map(|k| {
            let ppg = seg(k);
            let radio = if radio_is_ppg { ppg.clone() } else { seg(k) };
            SegmentPair { record_id: format!("s{:02}_1", k % 3), index: k, radio, ppg, lag: 0 }
        })
        .collect()
}

#[test]
fn identity_model_scores_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.rpa");
    write_archive(&pairs, &random_pairs(20, 1, true), CANONICAL_RATE).unwrap();
    let model = dir.path().join("id.model");
    std::fs::write(&model, write_model(&Regressor::Ridge(RidgeModel::identity(400)))).unwrap();
    let r = cmd_eval(&RunConfig::default(), &pairs, &model, &dir.path().join("report")).unwrap();
    for m in &r.metrics {
        assert!(m.time_mae < 1e-9 && m.dct_mae < 1e-9, "{m:?}");
        assert!((m.pearson_median - 1.0).abs() < 1e-9);
    }
    assert_eq!(r.metrics[0].segments + r.metrics[1].segments, 20);
}

#[test]
fn zero_model_error_is_the_mean_reference_magnitude() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, pairs) = desk_pairs(dir.path());
    let model = dir.path().join("zero.model");
    std::fs::write(&model, write_model(&Regressor::Mlp(MlpModel::zeros(&[400, 8, 400], 0.01).unwrap()))).unwrap();
    let r = cmd_eval(&cfg, &pairs, &model, &dir.path().join("report")).unwrap();
    let (all, _) = read_archive(&pairs).unwrap();
    let (train, test) = split(&cfg, &all).unwrap();
    for (m, set) in r.metrics.iter().zip([&train, &test]) {
        let samples: Vec<f64> = set.iter().flat_map(|p| p.ppg.samples.iter().copied()).collect();
        let mean_abs = samples.iter().map(|v| v.abs()).sum::<f64>() / samples.len() as f64;
        assert!((m.time_mae - mean_abs).abs() < 1e-12);
        assert!(m.time_mae > 0.6 && m.time_mae < 1.0);
    }
}

#[test]
fn metrics_match_a_recomputation_from_the_waveform_table() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, pairs) = desk_pairs(dir.path());
    let model = dir.path().join("ridge.model");
    cmd_train(&cfg, &pairs, ModelKind::Ridge, &model).unwrap();
    let report = dir.path().join("report");
    cmd_eval(&cfg, &pairs, &model, &report).unwrap();

    let mut sums = std::collections::BTreeMap::<String, (f64, usize)>::new();
    let mut rd = csv::Reader::from_path(report.join(WAVEFORMS_FILE)).unwrap();
    for row in rd.records() {
        let row = row.unwrap();
        let (r, s): (f64, f64) = (row[5].parse().unwrap(), row[6].parse().unwrap());
        let e = sums.entry(row[0].to_string()).or_default();
        e.0 += (r - s).abs();
        e.1 += 1;
    }
    let mut rd = csv::Reader::from_path(report.join(METRICS_FILE)).unwrap();
    let mut seen = 0;
    for row in rd.records() {
        let row = row.unwrap();
        let (sum, n) = sums[&row[0]];
        let reported: f64 = row[2].parse().unwrap();
        assert!((reported - sum / n as f64).abs() < 1e-9);
        assert_eq!(row[1].parse::<usize>().unwrap() * 400, n);
        seen += 1;
    }
    assert_eq!(seen, 2);
    for f in ["overlay_best.svg", "overlay_median.svg", "overlay_worst.svg", "segments.csv"] {
        assert!(report.join(f).exists(), "{f}");
    }
}

#[test]
fn oversized_model_is_a_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.rpa");
    write_archive(&pairs, &random_pairs(6, 2, false), CANONICAL_RATE).unwrap();
    let model = dir.path().join("big.model");
    std::fs::write(&model, write_model(&Regressor::Ridge(RidgeModel::identity(500)))).unwrap();
    let e = cmd_eval(&RunConfig::default(), &pairs, &model, &dir.path().join("r")).unwrap_err();
    assert!(matches!(core_error(&e), Error::ModelMismatch(_)));
    let capture = dir.path().join("c");
    std::fs::create_dir(&capture).unwrap();
    one_record(&capture, "x", 3, 10.0, &[]);
    let e = cmd_translate(&RunConfig::default(), &capture.join("x.rpg"), &model, &dir.path().join("o.ppg")).unwrap_err();
    assert!(matches!(core_error(&e), Error::ModelMismatch(_)));
}

#[test]
fn translate_five_minutes() {
    let dir = tempfile::tempdir().unwrap();
    one_record(dir.path(), "rec", 21, 300.0, &[]);
    let model = dir.path().join("id.model");
    std::fs::write(&model, write_model(&Regressor::Ridge(RidgeModel::identity(400)))).unwrap();
    let (a, b) = (dir.path().join("a.ppg"), dir.path().join("b.ppg"));
    let x = cmd_translate(&RunConfig::default(), &dir.path().join("rec.rpg"), &model, &a).unwrap();
    assert_eq!(x.len(), 136 * 400);
    assert!((x.duration() - 299.2).abs() < 1e-9);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().next(), Some(format!("# rate_hz={}", 2000.0 / 11.0).as_str()));
    assert_eq!(read_ppg(&a).unwrap(), x);
    cmd_translate(&RunConfig::default(), &dir.path().join("rec.rpg"), &model, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
