//! Radio-to-PPG synthesis core.
//!
//! Everything in this crate is a pure function over in-memory buffers and
//! builds without `std` (an allocator is required). File formats, the
//! command line driver and worker pools live in the `rfppg` crate.
//!
//! The pipeline, leaf to root:
//!
//! * [`series`]: sampled signal types, Z-scoring, segmentation, MAE.
//! * [`resample`], [`filter`], [`wavelet`], [`dct`], [`pca`]: DSP building blocks.
//! * [`sim`]: OFDM transmitter, chest-modulated channel and channel estimation.
//! * [`preprocess`]: PPG conditioning, radio fusion/denoising, alignment.
//! * [`regress`]: DCT-domain ridge and MLP translators.
//! * [`metrics`]: correlation and heart-rate comparison of waveforms.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod dct;
pub mod error;
pub mod fft;
pub mod filter;
pub mod linalg;
pub mod metrics;
pub mod pca;
pub mod preprocess;
pub mod regress;
pub mod resample;
pub mod series;
pub mod sim;
pub mod wavelet;

pub use error::{Error, Result};
pub use series::{ComplexSeries, RealSeries, Segment};

/// Common rate of the processed radio and PPG series, chosen so that a
/// 2.2 s segment is exactly 400 samples.
pub const CANONICAL_RATE: f64 = 2000.0 / 11.0;

/// Length of one analysis segment in seconds.
pub const SEGMENT_SECONDS: f64 = 2.2;

/// Samples per segment at [`CANONICAL_RATE`].
pub const SEGMENT_LEN: usize = 400;
