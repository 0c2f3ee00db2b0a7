use alloc::string::String;

/// Errors raised by the signal, simulation and regression operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input is empty or too short ({len} samples, need at least {min})")]
    EmptyInput { len: usize, min: usize },
    #[error("input of {len} samples is shorter than the required {min}")]
    InputTooShort { len: usize, min: usize },
    #[error("input has zero variance")]
    DegenerateVariance,
    #[error("segment of {segment} samples exceeds the series length {len}")]
    SegmentTooLong { segment: usize, len: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("sample rate mismatch: expected {expected} Hz, got {actual} Hz")]
    RateMismatch { expected: f64, actual: f64 },
    #[error("cutoff {cutoff} Hz is not below the Nyquist frequency of a {rate} Hz series")]
    NyquistViolation { cutoff: f64, rate: f64 },
    #[error("{name} = {value} is outside {range}")]
    InvalidRange { name: &'static str, value: f64, range: &'static str },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("linear system is singular")]
    SingularSystem,
    #[error("dataset is empty or too small")]
    EmptyDataset,
    #[error("training loss diverged at epoch {epoch}")]
    DivergedLoss { epoch: usize },
    #[error("every window of the record was rejected")]
    EmptyResult,
    #[error("model does not fit the data: {0}")]
    ModelMismatch(String),
    #[error("malformed model text at line {line}: {msg}")]
    ModelFormat { line: usize, msg: String },
}

pub type Result<T> = core::result::Result<T, Error>;
