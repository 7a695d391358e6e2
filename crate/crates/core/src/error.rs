use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("text contains no words")]
    NoWords,

    #[error("keyword {keyword:?} does not occur in the text")]
    ExplicitKeywordAbsent { keyword: String },

    #[error("keyword {keyword:?} occurs {count} time(s), fewer than the required {min_count}")]
    BelowMinCount {
        keyword: String,
        count: usize,
        min_count: usize,
    },

    #[error("{keyword:?} is not a normalized word")]
    InvalidKeyword { keyword: String },

    #[error("keyword {keyword:?} has no occurrences; the watermark would be empty")]
    KeywordAbsent { keyword: String },

    #[error("watermarks use different keywords ({original:?} vs {extracted:?})")]
    KeywordMismatch { original: String, extracted: String },

    #[error("original watermark has no pairs")]
    EmptyOriginal,

    #[error("malformed watermark: {0}")]
    MalformedWatermark(String),

    #[error("no records to resolve")]
    EmptyInput,

    #[error("no record with id {id:?}")]
    UnknownRecord { id: String },

    #[error("corrupt registry record at line {line}: {reason}")]
    CorruptRecord { line: usize, reason: String },

    #[error("registry append did not become durable: {0}")]
    StorageFailure(#[source] io::Error),

    #[error("attack needs at least one word")]
    EmptyText,

    #[error("attack would delete {requested} words but only {available} remain")]
    DeleteExceedsText { requested: usize, available: usize },

    #[error("invalid attack spec: {0}")]
    InvalidAttackSpec(String),

    #[error("insertion lexicon contains no usable words")]
    EmptyLexicon,

    #[error("invalid suite config: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the keyword choice rather than by I/O or
    /// malformed input.
    pub fn is_keyword_error(&self) -> bool {
        matches!(
            self,
            Error::NoWords
                | Error::ExplicitKeywordAbsent { .. }
                | Error::BelowMinCount { .. }
                | Error::InvalidKeyword { .. }
                | Error::KeywordAbsent { .. }
                | Error::KeywordMismatch { .. }
                | Error::EmptyOriginal
                | Error::MalformedWatermark(_)
        )
    }

    /// Short machine-readable name, used in HTTP error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NoWords => "NoWords",
            Error::ExplicitKeywordAbsent { .. } => "ExplicitKeywordAbsent",
            Error::BelowMinCount { .. } => "BelowMinCount",
            Error::InvalidKeyword { .. } => "InvalidKeyword",
            Error::KeywordAbsent { .. } => "KeywordAbsent",
            Error::KeywordMismatch { .. } => "KeywordMismatch",
            Error::EmptyOriginal => "EmptyOriginal",
            Error::MalformedWatermark(_) => "MalformedWatermark",
            Error::EmptyInput => "EmptyInput",
            Error::UnknownRecord { .. } => "UnknownRecord",
            Error::CorruptRecord { .. } => "CorruptRecord",
            Error::StorageFailure(_) => "StorageFailure",
            Error::EmptyText => "EmptyText",
            Error::DeleteExceedsText { .. } => "DeleteExceedsText",
            Error::InvalidAttackSpec(_) => "InvalidAttackSpec",
            Error::EmptyLexicon => "EmptyLexicon",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io { .. } => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }
}
