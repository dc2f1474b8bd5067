use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Row and column numbers are 1-based; row 1 is the first data row after
/// the header.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing value at row {row}, column {col}")]
    MissingValue { row: usize, col: usize },
    #[error("unknown level `{token}` at row {row}, column {col}")]
    UnknownLevel { row: usize, col: usize, token: String },
    #[error("cannot parse `{token}` as a number at row {row}, column {col}")]
    Parse { row: usize, col: usize, token: String },
    #[error("header mismatch: {0}")]
    Header(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] hydap_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable identifier used in the structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingValue { .. } => "MissingValue",
            Error::UnknownLevel { .. } => "UnknownLevel",
            Error::Parse { .. } => "ParseError",
            Error::Header(_) => "HeaderMismatch",
            Error::Io { .. } => "IoError",
            Error::Csv(_) => "CsvError",
            Error::Config(_) => "ConfigError",
            Error::Json(_) => "JsonError",
            Error::Core(_) => "ModuleError",
            Error::Usage(_) => "UsageError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            _ => 1,
        }
    }
}
