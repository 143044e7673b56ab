use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: String, column: String },
    #[error("{file}:{line}: bad value {value:?} in column `{column}`")]
    BadValue {
        file: String,
        line: u64,
        column: String,
        value: String,
    },
    #[error("feature schema of release `{release}` differs from the first release")]
    SchemaMismatch { release: String },
    #[error("no release tables supplied")]
    Empty,
    #[error("need at least {needed} releases, found {found}")]
    TooFewReleases { needed: usize, found: usize },
    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("instance width {found} does not match training width {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("invalid classifier parameters: {0}")]
    InvalidParameter(String),
    #[error("scored set has a single class")]
    SingleClass,
    #[error("scored set is malformed: {0}")]
    MalformedScores(String),
    #[error("bootstrap run {run} exhausted {retries} retries without a two-class holdout")]
    ExhaustedRetries { run: usize, retries: usize },
    #[error("no run produced a computable AUC ({skipped} skipped)")]
    AllRunsSkipped { skipped: usize },
    #[error("test release has a single class")]
    SingleClassTestRelease,
    #[error("no candidate classifier remained")]
    AllExcluded,
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("paired differences have zero variance")]
    ZeroVariance,
    #[error("need at least {needed} observations, found {found}")]
    TooFew { needed: usize, found: usize },
    #[error("degenerate design: {0}")]
    Degenerate(String),
    #[error("cell exceeded its time budget of {secs:.1}s")]
    BudgetExceeded { secs: f64 },
    #[error("unknown report format `{0}`")]
    UnknownFormat(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{file}: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// Short machine-readable tag used in exclusion logs.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingColumn { .. } => "missing_column",
            Error::BadValue { .. } => "bad_value",
            Error::SchemaMismatch { .. } => "schema_mismatch",
            Error::Empty => "empty",
            Error::TooFewReleases { .. } => "too_few_releases",
            Error::TooFewRows { .. } => "too_few_rows",
            Error::DegenerateData(_) => "degenerate_data",
            Error::WidthMismatch { .. } => "width_mismatch",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::SingleClass => "single_class",
            Error::MalformedScores(_) => "malformed_scores",
            Error::ExhaustedRetries { .. } => "exhausted_retries",
            Error::AllRunsSkipped { .. } => "all_runs_skipped",
            Error::SingleClassTestRelease => "single_class_test_release",
            Error::AllExcluded => "all_excluded",
            Error::AllZeroDifferences => "all_zero_differences",
            Error::ZeroVariance => "zero_variance",
            Error::TooFew { .. } => "too_few",
            Error::Degenerate(_) => "degenerate",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::UnknownFormat(_) => "unknown_format",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Json { .. } => "json",
            Error::Csv { .. } => "csv",
        }
    }
}
