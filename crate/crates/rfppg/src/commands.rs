//! `preprocess`, `train`, `eval` and `translate`.

use std::path::{Path, PathBuf};

use rfppg_core::dct::Dct;
use rfppg_core::metrics::{heart_rate, iqr, median, pearson};
use rfppg_core::preprocess::{preprocess_radio, preprocess_record, SegmentPair};
use rfppg_core::regress::{
    dct_rows, mlp_train, read_model, ridge_fit, split_pairs, translate, validation_split, write_model, EpochStats,
    Regressor,
};
use rfppg_core::{Error, RealSeries};

use crate::archive::{canonical_order, read_archive, write_archive};
use crate::capture::read_capture;
use crate::config::RunConfig;
use crate::dataset::list_records;
use crate::error::{read_text, write_bytes, CliError, CliResult};
use crate::plot::{overlay_svg, Trace};
use crate::pool::map_ordered;
use crate::ppgfile::{read_ppg, write_ppg};

#[derive(Debug, Clone, PartialEq)]
pub struct RecordReport {
    pub record_id: String,
    pub pairs: usize,
    pub flagged: usize,
}

#[derive(Debug)]
pub struct PreprocessSummary {
    pub pairs: usize,
    pub records: Vec<RecordReport>,
    /// Records that could not be processed, with the reason.
    pub failures: Vec<(String, CliError)>,
}

/// Runs the pipeline on every record of `dataset_dir` and writes the pairs
/// to `out_file`. Bad records are skipped and reported.
pub fn cmd_preprocess(cfg: &RunConfig, dataset_dir: &Path, out_file: &Path) -> CliResult<PreprocessSummary> {
    let records = list_records(dataset_dir)?;
    let results = map_ordered(&records, |r| -> CliResult<_> {
        let radio = read_capture(&r.capture)?;
        let ppg = read_ppg(&r.ppg)?;
        preprocess_record(&r.id, &radio, &ppg, &cfg.pipeline).map_err(|e| CliError::core(&r.id, e))
    });
    let mut summary = PreprocessSummary { pairs: 0, records: Vec::new(), failures: Vec::new() };
    let mut pairs = Vec::new();
    for (r, out) in records.iter().zip(results) {
        match out {
            Ok(out) => {
                summary.records.push(RecordReport {
                    record_id: r.id.clone(),
                    pairs: out.pairs.len(),
                    flagged: out.flagged.len(),
                });
                pairs.extend(out.pairs);
            }
            Err(e) => summary.failures.push((r.id.clone(), e)),
        }
    }
    if pairs.is_empty() {
        return Err(CliError::core(format!("{}", dataset_dir.display()), Error::EmptyResult));
    }
    canonical_order(&mut pairs);
    summary.pairs = pairs.len();
    write_archive(out_file, &pairs, cfg.pipeline.target_rate)?;
    Ok(summary)
}

/// Regressor family chosen on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Ridge,
    Mlp,
}

impl ModelKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ridge" => Some(ModelKind::Ridge),
            "mlp" => Some(ModelKind::Mlp),
            _ => None,
        }
    }
}

/// `<model>.history.csv` next to the model file.
pub fn history_path(model: &Path) -> PathBuf {
    model.with_extension("history.csv")
}

fn load_pairs(cfg: &RunConfig, path: &Path) -> CliResult<Vec<SegmentPair>> {
    let (pairs, rate) = read_archive(path)?;
    let len = pairs.first().map_or(0, |p| p.radio.len());
    if len != cfg.segment_len() || rate != cfg.pipeline.target_rate {
        return Err(CliError::format(
            path,
            format!(
                "archive holds {len}-sample segments at {rate} Hz, the configuration expects {} at {} Hz",
                cfg.segment_len(),
                cfg.pipeline.target_rate
            ),
        ));
    }
    Ok(pairs)
}

/// Train and test pairs under the configured split.
pub fn split(cfg: &RunConfig, pairs: &[SegmentPair]) -> CliResult<(Vec<SegmentPair>, Vec<SegmentPair>)> {
    Ok(split_pairs(pairs, cfg.split_fraction, cfg.split_seed(), cfg.split_mode)?)
}

fn write_history(path: &Path, rows: &[EpochStats]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::format(path, e.to_string());
    w.write_record(["epoch", "train_mae", "val_mae"]).map_err(io)?;
    for r in rows {
        w.write_record([r.epoch.to_string(), r.train_mae.to_string(), r.val_mae.to_string()]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::format(path, e.to_string()))?;
    write_bytes(path, &bytes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub train_pairs: usize,
    pub test_pairs: usize,
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
    pub initial_val_mae: f64,
}

fn mae_rows(model: &Regressor, x: &rfppg_core::linalg::Matrix, y: &rfppg_core::linalg::Matrix) -> CliResult<f64> {
    if x.rows() == 0 {
        return Ok(f64::NAN);
    }
    let p = model.predict_batch(x)?;
    Ok(p.data().iter().zip(y.data()).map(|(a, b)| (a - b).abs()).sum::<f64>() / p.data().len() as f64)
}

fn gather(m: &rfppg_core::linalg::Matrix, rows: &[usize]) -> rfppg_core::linalg::Matrix {
    let mut out = rfppg_core::linalg::Matrix::zeros(rows.len(), m.cols());
    for (i, &r) in rows.iter().enumerate() {
        out.row_mut(i).copy_from_slice(m.row(r));
    }
    out
}

/// Fits a model on the training split of `pairs_file` in the DCT domain,
/// writes it to `out_model` and its loss history next to it.
pub fn cmd_train(cfg: &RunConfig, pairs_file: &Path, kind: ModelKind, out_model: &Path) -> CliResult<TrainSummary> {
    let pairs = load_pairs(cfg, pairs_file)?;
    if pairs.len() < 2 {
        return Err(Error::EmptyDataset.into());
    }
    let (train, test) = split(cfg, &pairs)?;
    let len = cfg.segment_len();
    let x = dct_rows(train.iter().map(|p| p.radio.samples.as_slice()), len, cfg.n_coeffs)?;
    let y = dct_rows(train.iter().map(|p| p.ppg.samples.as_slice()), len, cfg.n_coeffs)?;
    let tc = cfg.train_config();
    let (model, history, best_epoch, initial_val_mae) = match kind {
        ModelKind::Ridge => {
            let (fit, val) = validation_split(x.rows(), &tc);
            let (xf, yf) = (gather(&x, &fit), gather(&y, &fit));
            let model = Regressor::Ridge(ridge_fit(&xf, &yf, cfg.ridge_alpha)?);
            let train_mae = mae_rows(&model, &xf, &yf)?;
            let yv = gather(&y, &val);
            let val_mae = mae_rows(&model, &gather(&x, &val), &yv)?;
            let zero_val = yv.data().iter().map(|v| v.abs()).sum::<f64>() / yv.data().len().max(1) as f64;
            (model, vec![EpochStats { epoch: 1, train_mae, val_mae, objective: train_mae }], 1, zero_val)
        }
        ModelKind::Mlp => {
            let (m, h) = mlp_train(&x, &y, &tc)?;
            (Regressor::Mlp(m), h.epochs, h.best_epoch, h.initial_val_mae)
        }
    };
    write_bytes(out_model, write_model(&model).as_bytes())?;
    write_history(&history_path(out_model), &history)?;
    Ok(TrainSummary { train_pairs: train.len(), test_pairs: test.len(), history, best_epoch, initial_val_mae })
}

pub fn load_model(path: &Path) -> CliResult<Regressor> {
    read_model(&read_text(path)?).map_err(|e| CliError::core(format!("{}", path.display()), e))
}

/// Per-segment evaluation of one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentEval {
    pub record_id: String,
    pub index: usize,
    pub lag: isize,
    pub time_mae: f64,
    pub dct_mae: f64,
    pub pearson: f64,
    pub hr_reference: Option<f64>,
    pub hr_synthetic: Option<f64>,
    pub synthetic: Vec<f64>,
}

impl SegmentEval {
    pub fn hr_abs_err(&self) -> Option<f64> {
        Some((self.hr_synthetic? - self.hr_reference?).abs())
    }
}

/// Summary metrics of one split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMetrics {
    pub split: &'static str,
    pub segments: usize,
    /// Mean absolute error over all samples of all segments.
    pub time_mae: f64,
    /// Same over the DCT coefficients.
    pub dct_mae: f64,
    pub pearson_median: f64,
    pub pearson_iqr: f64,
    pub hr_abs_err_median: f64,
    /// Segments with a heart rate on both sides.
    pub hr_segments: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub metrics: Vec<SplitMetrics>,
    pub segments: Vec<(&'static str, Vec<SegmentEval>)>,
}

fn eval_pair(model: &Regressor, dct: &Dct, p: &SegmentPair, rate: f64) -> rfppg_core::Result<SegmentEval> {
    let reference = &p.ppg.samples;
    let c_radio = dct.forward(&p.radio.samples)?;
    let mut c_syn = model.predict(&c_radio[..model.input_dim()])?;
    c_syn.resize(reference.len(), 0.0);
    let synthetic = dct.inverse(&c_syn)?;
    let c_ref = dct.forward(reference)?;
    let n = reference.len() as f64;
    Ok(SegmentEval {
        record_id: p.record_id.clone(),
        index: p.index,
        lag: p.lag,
        time_mae: synthetic.iter().zip(reference).map(|(a, b)| (a - b).abs()).sum::<f64>() / n,
        dct_mae: c_syn.iter().zip(&c_ref).map(|(a, b)| (a - b).abs()).sum::<f64>() / n,
        pearson: pearson(&synthetic, reference)?,
        hr_reference: heart_rate(reference, rate),
        hr_synthetic: heart_rate(&synthetic, rate),
        synthetic,
    })
}

fn summarize(split: &'static str, pairs: &[SegmentPair], evals: &[SegmentEval]) -> SplitMetrics {
    let total: usize = pairs.iter().map(|p| p.ppg.len()).sum();
    let mut abs_sum = 0.0;
    for (p, e) in pairs.iter().zip(evals) {
        abs_sum += e.synthetic.iter().zip(&p.ppg.samples).map(|(a, b)| (a - b).abs()).sum::<f64>();
    }
    let dct_sum: f64 = pairs.iter().zip(evals).map(|(p, e)| e.dct_mae * p.ppg.len() as f64).sum();
    let r: Vec<f64> = evals.iter().map(|e| e.pearson).collect();
    let hr: Vec<f64> = evals.iter().filter_map(SegmentEval::hr_abs_err).collect();
    let nan = f64::NAN;
    SplitMetrics {
        split,
        segments: evals.len(),
        time_mae: if total == 0 { nan } else { abs_sum / total as f64 },
        dct_mae: if total == 0 { nan } else { dct_sum / total as f64 },
        pearson_median: median(&r).unwrap_or(nan),
        pearson_iqr: iqr(&r).unwrap_or(nan),
        hr_abs_err_median: median(&hr).unwrap_or(nan),
        hr_segments: hr.len(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

fn csv_bytes(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> CliResult<()> {
    let err = |e: String| CliError::format(path, e);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| err(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| err(e.to_string()))?;
    }
    write_bytes(path, &w.into_inner().map_err(|e| err(e.to_string()))?)
}

pub const METRICS_FILE: &str = "metrics.csv";
pub const SEGMENTS_FILE: &str = "segments.csv";
pub const WAVEFORMS_FILE: &str = "waveforms.csv";

/// Evaluates `model_file` on the train and test splits of `pairs_file`
/// and writes metrics, per-segment tables, waveforms and overlay plots
/// into `report_dir`.
pub fn cmd_eval(cfg: &RunConfig, pairs_file: &Path, model_file: &Path, report_dir: &Path) -> CliResult<EvalReport> {
    let pairs = load_pairs(cfg, pairs_file)?;
    let model = load_model(model_file)?;
    let len = cfg.segment_len();
    model.check_segment_len(len)?;
    if pairs.len() < 2 {
        return Err(Error::EmptyDataset.into());
    }
    let (train, test) = split(cfg, &pairs)?;
    let dct = Dct::new(len);
    let rate = cfg.pipeline.target_rate;
    let mut report = EvalReport { metrics: Vec::new(), segments: Vec::new() };
    let mut waveforms = Vec::new();
    for (name, set) in [("train", &train), ("test", &test)] {
        let evals = map_ordered(set, |p| eval_pair(&model, &dct, p, rate)).into_iter().collect::<Result<Vec<_>, _>>()?;
        report.metrics.push(summarize(name, set, &evals));
        for (p, e) in set.iter().zip(&evals) {
            waveforms.push((name, p, e.synthetic.clone()));
        }
        report.segments.push((name, evals));
    }

    std::fs::create_dir_all(report_dir).map_err(|e| CliError::io(report_dir, e))?;
    csv_bytes(
        &report_dir.join(METRICS_FILE),
        &["split", "segments", "time_mae", "dct_mae", "pearson_median", "pearson_iqr", "hr_abs_err_median", "hr_segments"],
        report.metrics.iter().map(|m| {
            vec![
                m.split.to_string(),
                m.segments.to_string(),
                m.time_mae.to_string(),
                m.dct_mae.to_string(),
                m.pearson_median.to_string(),
                m.pearson_iqr.to_string(),
                m.hr_abs_err_median.to_string(),
                m.hr_segments.to_string(),
            ]
        }),
    )?;
    csv_bytes(
        &report_dir.join(SEGMENTS_FILE),
        &["split", "record_id", "index", "lag", "time_mae", "dct_mae", "pearson", "hr_reference", "hr_synthetic"],
        report.segments.iter().flat_map(|(name, evals)| {
            evals.iter().map(move |e| {
                vec![
                    name.to_string(),
                    e.record_id.clone(),
                    e.index.to_string(),
                    e.lag.to_string(),
                    e.time_mae.to_string(),
                    e.dct_mae.to_string(),
                    e.pearson.to_string(),
                    opt(e.hr_reference),
                    opt(e.hr_synthetic),
                ]
            })
        }),
    )?;
    csv_bytes(
        &report_dir.join(WAVEFORMS_FILE),
        &["split", "record_id", "index", "sample", "time_s", "reference", "synthetic"],
        waveforms.iter().flat_map(|(name, p, syn)| {
            p.ppg.samples.iter().zip(syn).enumerate().map(move |(i, (r, s))| {
                vec![
                    name.to_string(),
                    p.record_id.clone(),
                    p.index.to_string(),
                    i.to_string(),
                    (i as f64 / rate).to_string(),
                    r.to_string(),
                    s.to_string(),
                ]
            })
        }),
    )?;
    let k = if test.is_empty() { 0 } else { 1 };
    write_overlays(&report.segments[k], if k == 0 { &train } else { &test }, rate, report_dir)?;
    Ok(report)
}

/// Best, median and worst correlated segments of the test split (the
/// training split when the test split is empty).
fn write_overlays(
    (name, evals): &(&'static str, Vec<SegmentEval>),
    pairs: &[SegmentPair],
    rate: f64,
    dir: &Path,
) -> CliResult<()> {
    if evals.is_empty() {
        return Ok(());
    }
    let mut order: Vec<usize> = (0..evals.len()).collect();
    order.sort_by(|&a, &b| evals[b].pearson.total_cmp(&evals[a].pearson).then(a.cmp(&b)));
    let picks = [("best", order[0]), ("median", order[order.len() / 2]), ("worst", order[order.len() - 1])];
    for (label, i) in picks {
        let e = &evals[i];
        let title = format!("{} segment {} ({name} split), r = {:.3}", e.record_id, e.index, e.pearson);
        let svg = overlay_svg(&title, rate, &[
            Trace { label: "reference PPG", color: "#222222", values: &pairs[i].ppg.samples },
            Trace { label: "synthetic PPG", color: "#d62728", values: &e.synthetic },
        ]);
        write_bytes(&dir.join(format!("overlay_{label}.svg")), svg.as_bytes())?;
    }
    Ok(())
}

/// Radio-only pipeline on one capture; every segment is translated and
/// the results are concatenated into a PPG file at the target rate.
pub fn cmd_translate(cfg: &RunConfig, capture_file: &Path, model_file: &Path, out_ppg: &Path) -> CliResult<RealSeries> {
    let radio = read_capture(capture_file)?;
    let model = load_model(model_file)?;
    model.check_segment_len(cfg.segment_len())?;
    let segments = preprocess_radio(&radio, &cfg.pipeline).map_err(|e| CliError::core(format!("{}", capture_file.display()), e))?;
    let parts = map_ordered(&segments, |s| translate(&model, &s.samples));
    let mut out = Vec::with_capacity(segments.len() * cfg.segment_len());
    for p in parts {
        out.extend(p?);
    }
    let series = RealSeries::new(out, cfg.pipeline.target_rate)?;
    write_ppg(out_ppg, &series)?;
    Ok(series)
}
