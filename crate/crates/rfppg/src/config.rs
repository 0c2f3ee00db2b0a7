//! `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Lists are comma
//! separated. Floats also accept `a/b`. Unknown or repeated keys and
//! out-of-range values are rejected when the file is loaded.

use std::fmt::Write;
use std::path::Path;

use rfppg_core::preprocess::{FuseMode, PipelineConfig};
use rfppg_core::regress::{SplitMode, TrainConfig, TRAIN_FRACTION};
use rfppg_core::sim::derive_seed;
use rfppg_core::wavelet::WaveletMode;

use crate::error::{read_text, CliError, CliResult};

/// Every key understood by [`RunConfig::parse`], in file order.
pub const KEYS: &[&str] = &[
    "seed",
    "subjects",
    "sessions",
    "duration_s",
    "scale",
    "snr_db",
    "fuse_mode",
    "wavelet_mode",
    "radio_levels",
    "radio_keep",
    "radio_keep_approx",
    "lpf_order",
    "lpf_cutoff",
    "artifact_z",
    "max_lag",
    "target_rate",
    "segment_seconds",
    "duration_tolerance",
    "split_fraction",
    "split_mode",
    "split_seed",
    "n_coeffs",
    "ridge_alpha",
    "mlp_dims",
    "leaky_slope",
    "l2_lambda",
    "learning_rate",
    "beta1",
    "beta2",
    "eps",
    "batch_size",
    "epochs",
    "patience",
    "val_fraction",
    "zero_output_init",
    "train_seed",
];

const SPLIT_TAG: u64 = 0x5B17;
const TRAIN_TAG: u64 = 0x7EA1;

/// Dataset, pipeline, split and training settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Dataset seed; split and training seeds derive from it unless set.
    pub seed: u64,
    pub subjects: usize,
    pub sessions: usize,
    /// Session length before `scale`.
    pub duration_s: f64,
    pub scale: f64,
    pub snr_db: f64,
    pub pipeline: PipelineConfig,
    pub split_fraction: f64,
    pub split_mode: SplitMode,
    pub split_seed: Option<u64>,
    /// Leading DCT coefficients fed to and predicted by the regressor.
    pub n_coeffs: usize,
    pub ridge_alpha: f64,
    /// `seed` inside is ignored; see [`RunConfig::train_config`].
    pub train: TrainConfig,
    pub train_seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            subjects: 16,
            sessions: 2,
            duration_s: 300.0,
            scale: 1.0,
            snr_db: 20.0,
            pipeline: PipelineConfig::default(),
            split_fraction: TRAIN_FRACTION,
            split_mode: SplitMode::Segment,
            split_seed: None,
            n_coeffs: 400,
            ridge_alpha: 10.0,
            train: TrainConfig::default(),
            train_seed: None,
        }
    }
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn float(v: &str) -> Result<f64, String> {
    let parsed = match v.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad number '{v}'"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad number '{v}'"))?;
            a / b
        }
        None => v.parse().map_err(|_| format!("bad number '{v}'"))?,
    };
    if !parsed.is_finite() {
        return Err(format!("'{v}' is not finite"));
    }
    Ok(parsed)
}

fn int<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("bad integer '{v}'"))
}

fn list(v: &str) -> Result<Vec<usize>, String> {
    v.split(',').map(|x| int(x.trim())).collect()
}

fn boolean(v: &str) -> Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got '{v}'")),
    }
}

fn optional_seed(v: &str) -> Result<Option<u64>, String> {
    if v == "auto" {
        Ok(None)
    } else {
        int(v).map(Some)
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        let p = &mut self.pipeline;
        let t = &mut self.train;
        match key {
            "seed" => self.seed = int(v)?,
            "subjects" => self.subjects = int(v)?,
            "sessions" => self.sessions = int(v)?,
            "duration_s" => self.duration_s = float(v)?,
            "scale" => self.scale = float(v)?,
            "snr_db" => self.snr_db = float(v)?,
            "fuse_mode" => p.fuse_mode = FuseMode::parse(v).ok_or(format!("unknown fuse mode '{v}'"))?,
            "wavelet_mode" => {
                p.radio_bands.mode = WaveletMode::parse(v).ok_or(format!("unknown wavelet mode '{v}'"))?
            }
            "radio_levels" => p.radio_bands.levels = int(v)?,
            "radio_keep" => p.radio_bands.keep_details = if v.is_empty() { Vec::new() } else { list(v)? },
            "radio_keep_approx" => p.radio_bands.keep_approx = boolean(v)?,
            "lpf_order" => p.lpf_order = int(v)?,
            "lpf_cutoff" => p.lpf_cutoff = float(v)?,
            "artifact_z" => p.artifact_z = float(v)?,
            "max_lag" => p.max_lag = int(v)?,
            "target_rate" => p.target_rate = float(v)?,
            "segment_seconds" => p.segment_seconds = float(v)?,
            "duration_tolerance" => p.duration_tolerance = float(v)?,
            "split_fraction" => self.split_fraction = float(v)?,
            "split_mode" => self.split_mode = SplitMode::parse(v).ok_or(format!("unknown split mode '{v}'"))?,
            "split_seed" => self.split_seed = optional_seed(v)?,
            "n_coeffs" => self.n_coeffs = int(v)?,
            "ridge_alpha" => self.ridge_alpha = float(v)?,
            "mlp_dims" => t.dims = list(v)?,
            "leaky_slope" => t.leaky_slope = float(v)?,
            "l2_lambda" => t.l2_lambda = float(v)?,
            "learning_rate" => t.learning_rate = float(v)?,
            "beta1" => t.beta1 = float(v)?,
            "beta2" => t.beta2 = float(v)?,
            "eps" => t.eps = float(v)?,
            "batch_size" => t.batch_size = int(v)?,
            "epochs" => t.epochs = int(v)?,
            "patience" => t.patience = if v == "none" { None } else { Some(int(v)?) },
            "val_fraction" => t.val_fraction = float(v)?,
            "zero_output_init" => t.zero_output_init = boolean(v)?,
            "train_seed" => self.train_seed = optional_seed(v)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Range and consistency checks across all keys.
    pub fn validate(&self) -> Result<(), String> {
        let p = &self.pipeline;
        check(self.subjects > 0 && self.sessions > 0, || "subjects and sessions must be positive".into())?;
        check(self.duration_s > 0.0, || format!("duration_s = {} must be positive", self.duration_s))?;
        check(self.scale > 0.0, || format!("scale = {} must be positive", self.scale))?;
        check(p.target_rate > 0.0, || format!("target_rate = {} must be positive", p.target_rate))?;
        check(p.segment_seconds > 0.0, || format!("segment_seconds = {} must be positive", p.segment_seconds))?;
        let len = self.segment_len();
        check(len >= 2, || format!("segments of {len} samples are too short"))?;
        check(2 * p.max_lag < len, || format!("max_lag {} must be below half the segment length {len}", p.max_lag))?;
        check(p.lpf_order > 0, || "lpf_order must be positive".into())?;
        check(p.lpf_cutoff > 0.0 && p.lpf_cutoff < p.target_rate / 2.0, || {
            format!("lpf_cutoff = {} must lie in (0, target_rate / 2)", p.lpf_cutoff)
        })?;
        check(p.artifact_z > 0.0, || format!("artifact_z = {} must be positive", p.artifact_z))?;
        check(p.duration_tolerance >= 0.0, || "duration_tolerance must be non-negative".into())?;
        let b = &p.radio_bands;
        check(b.levels > 0, || "radio_levels must be positive".into())?;
        check(b.keep_details.iter().all(|&j| j >= 1 && j <= b.levels), || {
            format!("radio_keep {:?} must lie in 1..={}", b.keep_details, b.levels)
        })?;
        check(!b.keep_details.is_empty() || b.keep_approx, || "radio_keep is empty and the approximation is dropped".into())?;
        check(self.split_fraction > 0.0 && self.split_fraction < 1.0, || {
            format!("split_fraction = {} must lie in (0, 1)", self.split_fraction)
        })?;
        check(self.n_coeffs >= 1 && self.n_coeffs <= len, || format!("n_coeffs = {} must lie in 1..={len}", self.n_coeffs))?;
        check(self.ridge_alpha >= 0.0, || format!("ridge_alpha = {} must be non-negative", self.ridge_alpha))?;
        let d = &self.train.dims;
        check(d.len() >= 2 && d[0] == self.n_coeffs && d[d.len() - 1] == self.n_coeffs, || {
            format!("mlp_dims {} must start and end with n_coeffs = {}", join(d), self.n_coeffs)
        })?;
        self.train.validate().map_err(|e| e.to_string())
    }

    /// Parses configuration text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, (usize, String)> {
        let mut cfg = Self::default();
        let mut seen = std::collections::BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or((i + 1, format!("expected 'key = value', got '{line}'")))?;
            let (k, v) = (k.trim(), v.trim());
            if !seen.insert(k.to_string()) && KEYS.contains(&k) {
                return Err((i + 1, format!("'{k}' is set twice")));
            }
            cfg.set(k, v).map_err(|m| (i + 1, m))?;
        }
        cfg.validate().map_err(|m| (0, m))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::parse(&read_text(path)?).map_err(|(line, msg)| match line {
            0 => CliError::format(path, msg),
            _ => CliError::Config { path: path.to_path_buf(), line, msg },
        })
    }

    /// Every key with its current value, in a form [`RunConfig::parse`] reads back.
    pub fn to_text(&self) -> String {
        let p = &self.pipeline;
        let t = &self.train;
        let seed = |s: Option<u64>| s.map_or("auto".to_string(), |s| s.to_string());
        let values = [
            self.seed.to_string(),
            self.subjects.to_string(),
            self.sessions.to_string(),
            self.duration_s.to_string(),
            self.scale.to_string(),
            self.snr_db.to_string(),
            p.fuse_mode.name().to_string(),
            p.radio_bands.mode.name().to_string(),
            p.radio_bands.levels.to_string(),
            join(&p.radio_bands.keep_details),
            p.radio_bands.keep_approx.to_string(),
            p.lpf_order.to_string(),
            p.lpf_cutoff.to_string(),
            p.artifact_z.to_string(),
            p.max_lag.to_string(),
            p.target_rate.to_string(),
            p.segment_seconds.to_string(),
            p.duration_tolerance.to_string(),
            self.split_fraction.to_string(),
            self.split_mode.name().to_string(),
            seed(self.split_seed),
            self.n_coeffs.to_string(),
            self.ridge_alpha.to_string(),
            join(&t.dims),
            t.leaky_slope.to_string(),
            t.l2_lambda.to_string(),
            t.learning_rate.to_string(),
            t.beta1.to_string(),
            t.beta2.to_string(),
            t.eps.to_string(),
            t.batch_size.to_string(),
            t.epochs.to_string(),
            t.patience.map_or("none".to_string(), |p| p.to_string()),
            t.val_fraction.to_string(),
            t.zero_output_init.to_string(),
            seed(self.train_seed),
        ];
        let mut out = String::new();
        for (k, v) in KEYS.iter().zip(values) {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Session length after scaling.
    pub fn session_seconds(&self) -> f64 {
        self.duration_s * self.scale
    }

    /// Samples per segment at the target rate.
    pub fn segment_len(&self) -> usize {
        (self.pipeline.segment_seconds * self.pipeline.target_rate).round() as usize
    }

    pub fn split_seed(&self) -> u64 {
        self.split_seed.unwrap_or_else(|| derive_seed(self.seed, SPLIT_TAG))
    }

    /// Training settings with the effective seed filled in.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: self.train_seed.unwrap_or_else(|| derive_seed(self.seed, TRAIN_TAG)), ..self.train.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_reference_setup() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!((c.subjects, c.sessions, c.duration_s), (16, 2, 300.0));
        assert_eq!(c.segment_len(), 400);
        assert_eq!(c.train.dims, vec![400, 512, 512, 512, 400]);
        assert_eq!((c.train.learning_rate, c.train.l2_lambda), (1e-4, 1e-6));
    }

    #[test]
    fn text_round_trip_covers_every_key() {
        let mut c = RunConfig::default();
        c.set("radio_keep", "4,5,6,7").unwrap();
        c.set("split_seed", "99").unwrap();
        c.set("patience", "none").unwrap();
        let text = c.to_text();
        assert_eq!(text.lines().count(), KEYS.len());
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
    }

    #[test]
    fn parses_comments_fractions_and_lists() {
        let c = RunConfig::parse("# desk run\nsubjects = 4 # four\ntarget_rate = 2000/11\nmlp_dims = 400, 64, 400\n").unwrap();
        assert_eq!(c.subjects, 4);
        assert_eq!(c.pipeline.target_rate, 2000.0 / 11.0);
        assert_eq!(c.train.dims, vec![400, 64, 400]);
    }

    #[test]
    fn rejects_unknown_repeated_and_invalid_values() {
        let line = |t: &str| RunConfig::parse(t).unwrap_err();
        assert_eq!(line("seed = 1\nbogus = 2\n").0, 2);
        assert!(line("seed = 1\nseed = 2\n").1.contains("twice"));
        assert_eq!(line("epochs = many\n").0, 1);
        assert_eq!(line("split_mode = random\n").0, 1);
        assert_eq!(line("no equals sign\n").0, 1);
        assert!(line("split_fraction = 1\n").1.contains("split_fraction"));
        assert!(line("n_coeffs = 100\n").1.contains("mlp_dims"));
        assert!(line("radio_keep = 11\n").1.contains("radio_keep"));
        assert!(line("max_lag = 200\n").1.contains("max_lag"));
        assert!(line("learning_rate = 0\n").1.contains("learning_rate"));
        assert!(line("duration_s = 1/0\n").1.contains("finite"));
    }

    #[test]
    fn derived_seeds_follow_the_base_seed() {
        let a = RunConfig::default();
        let b = RunConfig { seed: 7, ..RunConfig::default() };
        assert_ne!(a.split_seed(), b.split_seed());
        assert_ne!(a.train_config().seed, b.train_config().seed);
        let pinned = RunConfig { split_seed: Some(3), train_seed: Some(4), ..b };
        assert_eq!((pinned.split_seed(), pinned.train_config().seed), (3, 4));
    }
}
