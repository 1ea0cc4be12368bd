use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("format error in column {column}: {message}")]
    Format { column: usize, message: String },

    #[error("cell error at row {row}, {column}: {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("duplicate region index {index} at row {row}")]
    DuplicateIndex { index: usize, row: usize },

    #[error("csv error: {0}")]
    Csv(String),

    #[error("series has no present values")]
    EmptySeries,

    #[error("series too short: length {len}, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("week range {first}:{last} outside available weeks {lo}:{hi}")]
    Range {
        first: usize,
        last: usize,
        lo: usize,
        hi: usize,
    },

    #[error("region index {index} out of range 1..={n}")]
    RegionOutOfRange { index: usize, n: usize },

    #[error("pairing error: {0}")]
    Pairing(String),

    #[error("degenerate series for region {region}: zero variance")]
    Degenerate { region: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
