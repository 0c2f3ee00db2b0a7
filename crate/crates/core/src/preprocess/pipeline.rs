use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::filter::{butterworth_lpf, PPG_LPF_CUTOFF, PPG_LPF_ORDER};
use crate::preprocess::{
    align_segments, artifact_scan, bridge_windows, fuse_components, principal_parts, select_subcarriers, FlaggedWindow,
    FuseMode, ARTIFACT_Z, DEFAULT_MAX_LAG,
};
use crate::resample::resample;
use crate::series::{segment, zscore, RealSeries, Segment};
use crate::sim::SubcarrierMatrix;
use crate::wavelet::{dwt_denoise, ppg_baseline_remove, DenoiseBands};
use crate::{CANONICAL_RATE, SEGMENT_SECONDS};

/// Knobs of [`preprocess_record`].
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub fuse_mode: FuseMode,
    pub radio_bands: DenoiseBands,
    pub lpf_order: usize,
    pub lpf_cutoff: f64,
    pub artifact_z: f64,
    pub max_lag: usize,
    pub target_rate: f64,
    pub segment_seconds: f64,
    /// Largest tolerated difference between radio and PPG durations, seconds.
    pub duration_tolerance: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            fuse_mode: FuseMode::ComplexModulus,
            radio_bands: DenoiseBands::default(),
            lpf_order: PPG_LPF_ORDER,
            lpf_cutoff: PPG_LPF_CUTOFF,
            artifact_z: ARTIFACT_Z,
            max_lag: DEFAULT_MAX_LAG,
            target_rate: CANONICAL_RATE,
            segment_seconds: SEGMENT_SECONDS,
            duration_tolerance: 0.5,
        }
    }
}

/// One aligned radio/PPG training pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPair {
    pub record_id: String,
    pub index: usize,
    pub radio: Segment,
    pub ppg: Segment,
    /// Circular shift applied to the radio segment.
    pub lag: isize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordOutput {
    pub pairs: Vec<SegmentPair>,
    pub flagged: Vec<FlaggedWindow>,
}

/// PPG chain: artifact scan, baseline removal, low-pass, resampling,
/// record-level Z-score, segmentation. Flagged windows are bridged before
/// filtering and reported so their segments can be dropped.
pub fn preprocess_ppg(ppg: &RealSeries, cfg: &PipelineConfig) -> Result<(Vec<Segment>, Vec<FlaggedWindow>)> {
    let flagged = artifact_scan(ppg, cfg.artifact_z, cfg.segment_seconds)?;
    let x = bridge_windows(ppg, &flagged);
    let x = ppg_baseline_remove(&x)?;
    let x = butterworth_lpf(&x, cfg.lpf_order, cfg.lpf_cutoff)?;
    let x = resample(&x, cfg.target_rate)?;
    let x = zscore(&x)?;
    Ok((segment(&x, cfg.segment_seconds)?, flagged))
}

/// Radio chain: subcarrier selection, PCA fusion, resampling to the
/// target rate, wavelet band-pass, record-level Z-score, segmentation.
///
/// The wavelet bands are defined at the target rate, so resampling comes
/// first. In concat mode the two halves of the fused series are resampled
/// and denoised separately and recombined by root-sum-of-squares onto one
/// timeline.
pub fn preprocess_radio(radio: &SubcarrierMatrix, cfg: &PipelineConfig) -> Result<Vec<Segment>> {
    let selected = select_subcarriers(radio)?;
    let (xr, xi) = principal_parts(&selected)?;
    let rate = selected.symbol_rate;
    let fused = fuse_components(&xr, &xi, cfg.fuse_mode, rate)?;
    let band = |x: &[f64]| -> Result<Vec<f64>> {
        let r = resample(&RealSeries::new(x.to_vec(), rate)?, cfg.target_rate)?;
        Ok(dwt_denoise(&r, &cfg.radio_bands)?.into_samples())
    };
    let series = match cfg.fuse_mode {
        FuseMode::ComplexModulus => band(fused.values.samples())?,
        FuseMode::Concat => {
            let (a, b) = fused.values.samples().split_at(xr.len());
            let (a, b) = (band(a)?, band(b)?);
            a.iter().zip(&b).map(|(u, v)| libm::hypot(*u, *v)).collect()
        }
    };
    let x = zscore(&RealSeries::new(series, cfg.target_rate)?)?;
    segment(&x, cfg.segment_seconds)
}

/// Full pipeline for one record; returns the aligned pairs for every
/// segment index present on both sides and not flagged.
pub fn preprocess_record(
    record_id: &str,
    radio: &SubcarrierMatrix,
    ppg: &RealSeries,
    cfg: &PipelineConfig,
) -> Result<RecordOutput> {
    let gap = libm::fabs(radio.duration() - ppg.duration());
    if gap > cfg.duration_tolerance {
        return Err(Error::InvalidArgument(alloc::format!(
            "radio covers {:.3} s but PPG covers {:.3} s",
            radio.duration(),
            ppg.duration()
        )));
    }
    let (ppg_segs, flagged) = preprocess_ppg(ppg, cfg)?;
    let radio_segs = preprocess_radio(radio, cfg)?;
    let mut pairs = Vec::new();
    for (index, (r, p)) in radio_segs.iter().zip(&ppg_segs).enumerate() {
        if flagged.iter().any(|f| f.index == index) {
            continue;
        }
        let a = align_segments(r, p, cfg.max_lag)?;
        pairs.push(SegmentPair { record_id: record_id.into(), index, radio: a.shifted, ppg: p.clone(), lag: a.lag });
    }
    if pairs.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok(RecordOutput { pairs, flagged })
}
