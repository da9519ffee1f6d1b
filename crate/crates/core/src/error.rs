use thiserror::Error;

use crate::grid::AngleChannel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-uniform sampling at sample {index}: gap of {gap_ms} ms, expected {period_ms} ms")]
    NonUniformSampling { index: usize, gap_ms: i64, period_ms: i64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("negative pressure {value} in frame {frame}, cell {cell}")]
    NegativePressure { frame: usize, cell: usize, value: f64 },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
    #[error("too short: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("too large: {len} samples, at most {max} supported")]
    TooLarge { len: usize, max: usize },
    #[error("grid width {width} does not match expected {expected}")]
    BadWidth { width: usize, expected: usize },
    #[error("timestamps not strictly increasing at sample {index}")]
    NonMonotonic { index: usize },
    #[error("series is empty")]
    EmptySeries,
    #[error("requested time {t} outside data span [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error("time spans do not overlap")]
    NoOverlap,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no pixel passes the correlation threshold {threshold}")]
    EmptySelection { threshold: f64 },
    #[error("channel {channel} has zero variance")]
    ZeroVariance { channel: usize },
    #[error("{0} angle channel is constant")]
    ConstantAngle(AngleChannel),
    #[error("expected {expected} channels, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("sample is degenerate (all values equal)")]
    DegenerateSample,
    #[error("both samples are constant and equal")]
    DegenerateBoth,
    #[error("group has {len} reports, need at least {min}")]
    InsufficientGroup { len: usize, min: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("header mismatch at line {line}: {msg}")]
    HeaderMismatch { line: usize, msg: String },
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code for the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonUniformSampling { .. } => "NON_UNIFORM_SAMPLING",
            Error::LengthMismatch { .. } => "LENGTH_MISMATCH",
            Error::NegativePressure { .. } => "NEGATIVE_PRESSURE",
            Error::NonFinite { .. } => "NON_FINITE",
            Error::TooShort { .. } => "TOO_SHORT",
            Error::TooLarge { .. } => "TOO_LARGE",
            Error::BadWidth { .. } => "BAD_WIDTH",
            Error::NonMonotonic { .. } => "NON_MONOTONIC",
            Error::EmptySeries => "EMPTY_SERIES",
            Error::OutOfRange { .. } => "OUT_OF_RANGE",
            Error::NoOverlap => "NO_OVERLAP",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::EmptySelection { .. } => "EMPTY_SELECTION",
            Error::ZeroVariance { .. } => "ZERO_VARIANCE",
            Error::ConstantAngle(_) => "ZERO_VARIANCE",
            Error::ChannelMismatch { .. } => "CHANNEL_MISMATCH",
            Error::DimensionMismatch(_) => "DIMENSION_MISMATCH",
            Error::NumericalFailure(_) => "NUMERICAL_FAILURE",
            Error::DegenerateSample => "DEGENERATE_SAMPLE",
            Error::DegenerateBoth => "DEGENERATE_BOTH",
            Error::InsufficientGroup { .. } => "INSUFFICIENT_GROUP",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::HeaderMismatch { .. } => "HEADER_MISMATCH",
            Error::VersionMismatch { .. } => "VERSION_MISMATCH",
            Error::Io(_) => "IO_FAILURE",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
