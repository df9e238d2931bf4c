use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point cloud: {0}")]
    InvalidPointCloud(String),

    #[error("points {first} and {second} coincide (distance 0); the log-ratio is undefined")]
    DuplicatePoints { first: usize, second: usize },

    #[error("k = {k} exceeds N - 1 = {}", .n_points - 1)]
    KTooLarge { k: usize, n_points: usize },

    #[error("invalid k = {0}: must be at least {1}")]
    InvalidK(usize, usize),

    #[error("subsample size {m} is outside 1..={n_points}")]
    SubsampleTooLarge { m: usize, n_points: usize },

    #[error("row {row}: all {k} neighbor distances are equal")]
    DegenerateRow { row: usize, k: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid estimator config: {0}")]
    InvalidConfig(String),

    #[error("malformed NPY file: {0}")]
    Format(String),

    #[error("manifest schema error: {0}")]
    Schema(String),

    #[error("missing dump: {}", .0.display())]
    MissingDump(PathBuf),

    #[error("layer {index} has {found} rows but layer 1 has {expected}")]
    RowCountMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("layer {index}: {source}")]
    Layer {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("curve has no valid layer estimates")]
    EmptyCurve,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("record for dataset {0:?} has no peaks")]
    EmptyRecord(String),

    #[error("{0} datasets given; at least 3 are needed")]
    TooFewDatasets(usize),

    #[error("training-size group {0} is empty")]
    EmptyGroup(u64),

    #[error("invalid manifold spec: {0}")]
    SpecInvalid(String),

    #[error("invalid record input: {0}")]
    Records(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable name of the variant, used in CLI error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidPointCloud(_) => "InvalidPointCloud",
            Error::DuplicatePoints { .. } => "DuplicatePoints",
            Error::KTooLarge { .. } => "KTooLarge",
            Error::InvalidK(..) => "InvalidK",
            Error::SubsampleTooLarge { .. } => "SubsampleTooLarge",
            Error::DegenerateRow { .. } => "DegenerateRow",
            Error::EmptyInput => "EmptyInput",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Format(_) => "FormatError",
            Error::Schema(_) => "SchemaError",
            Error::MissingDump(_) => "MissingDump",
            Error::RowCountMismatch { .. } => "RowCountMismatch",
            Error::Layer { source, .. } => source.code(),
            Error::EmptyCurve => "EmptyCurve",
            Error::LengthMismatch(..) => "LengthMismatch",
            Error::ZeroVariance(_) => "ZeroVariance",
            Error::EmptyRecord(_) => "EmptyRecord",
            Error::TooFewDatasets(_) => "TooFewDatasets",
            Error::EmptyGroup(_) => "EmptyGroup",
            Error::SpecInvalid(_) => "SpecInvalid",
            Error::Records(_) => "RecordsError",
            Error::Io { .. } => "IoError",
            Error::Json(_) => "JsonError",
            Error::Csv(_) => "CsvError",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_layer(self, index: usize) -> Self {
        Error::Layer {
            index,
            source: Box::new(self),
        }
    }
}
