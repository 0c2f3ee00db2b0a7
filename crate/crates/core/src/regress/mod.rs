//! DCT-domain translation of radio segments into PPG segments.

mod format;
mod mlp;
mod ridge;

pub use format::{read_model, write_model, FORMAT_MAGIC, FORMAT_VERSION};
pub use mlp::{mlp_train, validation_split, Adam, EpochStats, Layer, MlpModel, TrainConfig, TrainHistory, DEFAULT_DIMS, LEAKY_SLOPE};
pub use ridge::{ridge_fit, RidgeModel};

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dct::Dct;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::preprocess::SegmentPair;

/// Default training share of the pairs.
pub const TRAIN_FRACTION: f64 = 0.8;

/// A trained translator of DCT coefficient vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum Regressor {
    Ridge(RidgeModel),
    Mlp(MlpModel),
}

impl Regressor {
    pub fn kind(&self) -> &'static str {
        match self {
            Regressor::Ridge(_) => "ridge",
            Regressor::Mlp(_) => "mlp",
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Regressor::Ridge(m) => m.input_dim(),
            Regressor::Mlp(m) => m.input_dim(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Regressor::Ridge(m) => m.output_dim(),
            Regressor::Mlp(m) => m.output_dim(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Regressor::Ridge(m) => m.predict(x),
            Regressor::Mlp(m) => m.forward(x),
        }
    }

    pub fn predict_batch(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            Regressor::Ridge(m) => m.predict_batch(x),
            Regressor::Mlp(m) => m.forward_batch(x),
        }
    }

    /// Checks that the model can translate segments of `len` samples.
    pub fn check_segment_len(&self, len: usize) -> Result<()> {
        if self.input_dim() > len || self.output_dim() > len {
            return Err(Error::ModelMismatch(alloc::format!(
                "{} model maps {} -> {} coefficients, segments have {len}",
                self.kind(),
                self.input_dim(),
                self.output_dim()
            )));
        }
        Ok(())
    }
}

/// DCT-II of every segment, truncated to the first `n_coeffs`
/// coefficients, as the rows of a matrix.
pub fn dct_rows<'a>(segments: impl IntoIterator<Item = &'a [f64]>, len: usize, n_coeffs: usize) -> Result<Matrix> {
    if n_coeffs == 0 || n_coeffs > len {
        return Err(Error::InvalidRange { name: "n_coeffs", value: n_coeffs as f64, range: "[1, segment length]" });
    }
    let dct = Dct::new(len);
    let mut data = Vec::new();
    let mut rows = 0;
    for s in segments {
        data.extend_from_slice(&dct.forward(s)?[..n_coeffs]);
        rows += 1;
    }
    Matrix::from_vec(rows, n_coeffs, data)
}

/// Synthetic PPG segment: inverse DCT of the model's prediction from the
/// radio segment's DCT. Coefficients beyond the model's output are zero.
pub fn translate(model: &Regressor, radio: &[f64]) -> Result<Vec<f64>> {
    model.check_segment_len(radio.len())?;
    let dct = Dct::new(radio.len());
    let c = dct.forward(radio)?;
    let mut out = model.predict(&c[..model.input_dim()])?;
    out.resize(radio.len(), 0.0);
    dct.inverse(&out)
}

/// How [`split_pairs`] partitions the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitMode {
    /// Individual segments are shuffled.
    #[default]
    Segment,
    /// Whole subjects are shuffled; see [`subject_of`].
    Subject,
}

impl SplitMode {
    pub fn name(self) -> &'static str {
        match self {
            SplitMode::Segment => "segment",
            SplitMode::Subject => "subject",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "segment" => Some(SplitMode::Segment),
            "subject" => Some(SplitMode::Subject),
            _ => None,
        }
    }
}

/// Subject part of a record id: everything before the last `_`.
pub fn subject_of(record_id: &str) -> &str {
    record_id.rsplit_once('_').map_or(record_id, |(s, _)| s)
}

/// Seeded shuffle of `0..n`; the first `floor(n * fraction)` go to
/// training. Both halves are returned in ascending order.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::EmptyDataset);
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidRange { name: "fraction", value: fraction, range: "(0, 1)" });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = libm::floor(n as f64 * fraction) as usize;
    let (mut train, mut test) = (order[..k].to_vec(), order[k..].to_vec());
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Train/test split of segment pairs by segment or by subject.
pub fn split_pairs(
    pairs: &[SegmentPair],
    fraction: f64,
    seed: u64,
    mode: SplitMode,
) -> Result<(Vec<SegmentPair>, Vec<SegmentPair>)> {
    let (train_idx, _) = match mode {
        SplitMode::Segment => split_indices(pairs.len(), fraction, seed)?,
        SplitMode::Subject => {
            let subjects: Vec<&str> =
                pairs.iter().map(|p| subject_of(&p.record_id)).collect::<BTreeSet<_>>().into_iter().collect();
            let (keep, _) = split_indices(subjects.len(), fraction, seed)?;
            let keep: BTreeSet<&str> = keep.into_iter().map(|i| subjects[i]).collect();
            let train = (0..pairs.len()).filter(|&i| keep.contains(subject_of(&pairs[i].record_id))).collect();
            (train, Vec::new())
        }
    };
    let mut is_train = alloc::vec![false; pairs.len()];
    train_idx.iter().for_each(|&i| is_train[i] = true);
    let (train, test): (Vec<_>, Vec<_>) = pairs.iter().cloned().zip(is_train).partition(|(_, t)| *t);
    Ok((train.into_iter().map(|(p, _)| p).collect(), test.into_iter().map(|(p, _)| p).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Segment;
    use alloc::format;
    use alloc::string::String;
    use alloc::vec;
    use rand::Rng;

    fn pair(record: &str, index: usize) -> SegmentPair {
        let seg = Segment { samples: vec![index as f64; 4], origin_index: 0, duration_s: 2.2 };
        SegmentPair { record_id: String::from(record), index, radio: seg.clone(), ppg: seg, lag: 0 }
    }

    #[test]
    fn eighty_twenty() {
        let pairs: Vec<_> = (0..100).map(|i| pair("s1_a", i)).collect();
        let (tr, te) = split_pairs(&pairs, 0.8, 9, SplitMode::Segment).unwrap();
        assert_eq!((tr.len(), te.len()), (80, 20));
        let mut all: Vec<usize> = tr.iter().chain(&te).map(|p| p.index).collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(split_pairs(&pairs, 0.8, 9, SplitMode::Segment).unwrap(), (tr.clone(), te));
        assert_ne!(split_pairs(&pairs, 0.8, 10, SplitMode::Segment).unwrap().0, tr);
    }

    #[test]
    fn five_pairs_split_four_one() {
        let (tr, te) = split_indices(5, 0.8, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (4, 1));
        assert_eq!(split_indices(1, 0.8, 1), Err(Error::EmptyDataset));
    }

    #[test]
    fn subject_split_keeps_subjects_whole() {
        let pairs: Vec<_> =
            (0..5).flat_map(|s| (0..2).flat_map(move |r| (0..3).map(move |i| pair(&format!("s{s}_{r}"), i)))).collect();
        let (tr, te) = split_pairs(&pairs, 0.8, 2, SplitMode::Subject).unwrap();
        assert_eq!((tr.len(), te.len()), (24, 6));
        let train_subjects: BTreeSet<&str> = tr.iter().map(|p| subject_of(&p.record_id)).collect();
        assert!(te.iter().all(|p| !train_subjects.contains(subject_of(&p.record_id))));
        assert_eq!(subject_of("s3_1"), "s3");
        assert_eq!(subject_of("plain"), "plain");
    }

    #[test]
    fn identity_and_zero_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..400).map(|_| rng.random_range(-2.0..2.0)).collect();
        let id = Regressor::Ridge(RidgeModel::identity(400));
        let y = translate(&id, &x).unwrap();
        assert!(y.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-9));
        let zero = Regressor::Mlp(MlpModel::zeros(&DEFAULT_DIMS, LEAKY_SLOPE).unwrap());
        assert!(translate(&zero, &x).unwrap().iter().all(|v| v.abs() < 1e-12));
        assert!(matches!(translate(&id, &x[..100]), Err(Error::ModelMismatch(_))));
    }

    #[test]
    fn truncated_models_pad_with_zero_coefficients() {
        let x: Vec<f64> = (0..400).map(|i| (i as f64 * 0.01).sin()).collect();
        let m = Regressor::Ridge(RidgeModel::identity(50));
        let y = translate(&m, &x).unwrap();
        let c = crate::dct::dct2(&y).unwrap();
        assert!(c[50..].iter().all(|v| v.abs() < 1e-12));
        let rows = dct_rows([x.as_slice()], 400, 50).unwrap();
        assert_eq!((rows.rows(), rows.cols()), (1, 50));
    }
}
