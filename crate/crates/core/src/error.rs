use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: u32, got: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degree {0} out of range (supported: 1..=20)")]
    DegreeOutOfRange(u32),

    #[error("matrix is not orthogonal (deviation {0:.3e})")]
    NotOrthogonal(f64),

    #[error("frame columns are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("zero polynomial has no maximizer on the sphere")]
    ZeroPolynomial,

    #[error("zero vector")]
    ZeroVector,

    #[error("{what} = {value} out of range ({range})")]
    OutOfRange {
        what: &'static str,
        value: String,
        range: String,
    },

    #[error("instance outside oracle range: {0}")]
    OracleRange(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("report does not match polynomial: {0}")]
    ReportMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(what: &'static str, value: impl ToString, range: &str) -> Error {
    Error::OutOfRange {
        what,
        value: value.to_string(),
        range: range.to_string(),
    }
}
