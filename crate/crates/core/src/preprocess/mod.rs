//! Turning a radio capture and a reference PPG into aligned, Z-scored
//! 400-sample segment pairs.

mod align;
mod artifact;
mod pipeline;

pub use align::{align_segments, Alignment, DEFAULT_MAX_LAG};
pub use artifact::{artifact_scan, bridge_windows, FlaggedWindow, ARTIFACT_Z};
pub use pipeline::{preprocess_ppg, preprocess_radio, preprocess_record, PipelineConfig, RecordOutput, SegmentPair};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pca::pca_first_component;
use crate::series::RealSeries;
use crate::sim::{ComplexMatrix, SubcarrierMatrix};

/// Subcarriers in a full capture.
pub const FULL_SUBCARRIERS: usize = 64;
/// Subcarriers kept for fusion.
pub const SELECTED_SUBCARRIERS: usize = 16;

/// Keeps every fourth subcarrier (rows 0, 4, ..., 60).
pub fn select_subcarriers(m: &SubcarrierMatrix) -> Result<SubcarrierMatrix> {
    if m.n_subcarriers() != FULL_SUBCARRIERS {
        return Err(Error::ShapeMismatch(alloc::format!(
            "expected {FULL_SUBCARRIERS} subcarriers, got {}",
            m.n_subcarriers()
        )));
    }
    let step = FULL_SUBCARRIERS / SELECTED_SUBCARRIERS;
    let est = ComplexMatrix::from_fn(SELECTED_SUBCARRIERS, m.n_symbols(), |r, c| m.estimates.get(r * step, c));
    SubcarrierMatrix::new(est, m.symbol_rate)
}

/// How the real- and imaginary-part components are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FuseMode {
    /// `|[x_r ; x_i]|`, length `2N`.
    Concat,
    /// `|x_r + j x_i|`, length `N`.
    #[default]
    ComplexModulus,
}

impl FuseMode {
    pub fn name(self) -> &'static str {
        match self {
            FuseMode::Concat => "concat",
            FuseMode::ComplexModulus => "complex-modulus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "concat" => Some(FuseMode::Concat),
            "complex-modulus" => Some(FuseMode::ComplexModulus),
            _ => None,
        }
    }
}

/// Nonnegative fused radio series. In concat mode the rate is the symbol
/// rate although the two halves share one timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedRadioSeries {
    pub values: RealSeries,
    pub mode: FuseMode,
}

/// Leading-component projections of the real and imaginary parts of a
/// 16-row matrix.
///
/// The projections are of the uncentered rows (centered scores plus the
/// projected mean). Centered scores swing around zero, and the modulus
/// that follows would fold them.
pub fn principal_parts(m: &SubcarrierMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    if m.n_subcarriers() != SELECTED_SUBCARRIERS {
        return Err(Error::ShapeMismatch(alloc::format!(
            "expected {SELECTED_SUBCARRIERS} subcarriers, got {}",
            m.n_subcarriers()
        )));
    }
    let (p, n) = (m.n_subcarriers(), m.n_symbols());
    let data = m.estimates.data();
    let re = Matrix::from_vec(p, n, data.iter().map(|v| v.re).collect())?;
    let im = Matrix::from_vec(p, n, data.iter().map(|v| v.im).collect())?;
    Ok((pca_first_component(&re)?.raw_scores(), pca_first_component(&im)?.raw_scores()))
}

/// Combines the two component series per `mode`.
pub fn fuse_components(xr: &[f64], xi: &[f64], mode: FuseMode, rate: f64) -> Result<FusedRadioSeries> {
    if xr.len() != xi.len() {
        return Err(Error::LengthMismatch { expected: xr.len(), actual: xi.len() });
    }
    let values = match mode {
        FuseMode::Concat => xr.iter().chain(xi).map(|v| libm::fabs(*v)).collect(),
        FuseMode::ComplexModulus => xr.iter().zip(xi).map(|(a, b)| libm::hypot(*a, *b)).collect(),
    };
    Ok(FusedRadioSeries { values: RealSeries::new(values, rate)?, mode })
}

/// PCA on the real and imaginary parts separately, then the modulus.
pub fn pca_fuse(m: &SubcarrierMatrix, mode: FuseMode) -> Result<FusedRadioSeries> {
    let (xr, xi) = principal_parts(m)?;
    fuse_components(&xr, &xi, mode, m.symbol_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use num_complex::Complex64;

    fn ramp_rows(rows: usize, cols: usize) -> SubcarrierMatrix {
        let m = ComplexMatrix::from_fn(rows, cols, |r, _| Complex64::new(r as f64, 0.0));
        SubcarrierMatrix::new(m, 250.0).unwrap()
    }

    #[test]
    fn selection_keeps_every_fourth_row() {
        let m = ramp_rows(64, 100);
        let s = select_subcarriers(&m).unwrap();
        assert_eq!((s.n_subcarriers(), s.n_symbols()), (16, 100));
        for r in 0..16 {
            assert!(s.estimates.row(r).iter().all(|v| v.re == (4 * r) as f64));
            assert_eq!(s.estimates.row(r), m.estimates.row(4 * r));
        }
        assert!(matches!(select_subcarriers(&s), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn fuse_definitions() {
        let c = fuse_components(&[1.0, -2.0], &[3.0, -4.0], FuseMode::Concat, 1.0).unwrap();
        assert_eq!(c.values.samples(), &[1.0, 2.0, 3.0, 4.0]);
        let m = fuse_components(&[3.0, 0.0], &[4.0, 0.0], FuseMode::ComplexModulus, 1.0).unwrap();
        assert_eq!(m.values.samples(), &[5.0, 0.0]);
    }

    fn moving_matrix() -> SubcarrierMatrix {
        let m = ComplexMatrix::from_fn(16, 300, |r, c| {
            let t = c as f64 / 250.0;
            let phi = 0.1 * libm::sin(2.0 * core::f64::consts::PI * 1.2 * t);
            Complex64::new(0.8, 0.0) + Complex64::from_polar(0.3 + 0.01 * r as f64, 1.5 + phi)
        });
        SubcarrierMatrix::new(m, 250.0).unwrap()
    }

    #[test]
    fn concat_is_twice_as_long_and_nonnegative() {
        let m = moving_matrix();
        let c = pca_fuse(&m, FuseMode::Concat).unwrap();
        let k = pca_fuse(&m, FuseMode::ComplexModulus).unwrap();
        assert_eq!(c.values.len(), 2 * k.values.len());
        assert!(c.values.samples().iter().chain(k.values.samples()).all(|v| *v >= 0.0));
    }

    #[test]
    fn modulus_follows_the_channel_magnitude() {
        // all rows alike: the uncentered projection is sqrt(16) times the row
        let m = ComplexMatrix::from_fn(16, 300, |_, c| {
            let phi = 0.1 * libm::sin(c as f64 / 20.0);
            Complex64::new(0.8, 0.0) + Complex64::from_polar(0.3, 1.5 + phi)
        });
        let m = SubcarrierMatrix::new(m, 250.0).unwrap();
        let k = pca_fuse(&m, FuseMode::ComplexModulus).unwrap();
        for (c, v) in k.values.samples().iter().enumerate() {
            let h = m.estimates.get(0, c).norm();
            assert!((v - 4.0 * h).abs() < 1e-9, "{v} vs {}", 4.0 * h);
        }
    }

    #[test]
    fn constant_matrix_is_degenerate() {
        let m = SubcarrierMatrix::new(ComplexMatrix::from_fn(16, 40, |_, _| Complex64::new(1.0, 1.0)), 250.0).unwrap();
        assert_eq!(pca_fuse(&m, FuseMode::ComplexModulus), Err(Error::DegenerateVariance));
        assert!(vec![FuseMode::Concat, FuseMode::ComplexModulus]
            .into_iter()
            .all(|m| FuseMode::parse(m.name()) == Some(m)));
    }
}
