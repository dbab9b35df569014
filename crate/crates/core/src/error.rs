use std::path::PathBuf;

use crate::hmm::{StateId, Violation};

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("narrative {index}: {reason}")]
    MalformedNarrative { index: usize, reason: String },

    #[error("invalid event label {0:?}")]
    InvalidLabel(String),

    #[error("symbol {symbol:?} at position {position} is not in the model alphabet")]
    UnknownSymbol { symbol: String, position: usize },

    #[error("sequence unreachable under model")]
    Unreachable,

    #[error("model excludes corpus")]
    ModelExcludesCorpus,

    #[error("max_steps exceeded ({0})")]
    MaxStepsExceeded(usize),

    #[error("invalid model: {0}")]
    InvalidModel(#[from] Violation),

    #[error("cannot merge {0} with {1}: {2}")]
    InvalidMerge(StateId, StateId, &'static str),

    #[error("cannot delete edge {0}->{1}: {2}")]
    InvalidDeletion(StateId, StateId, &'static str),

    #[error("no redistribution path from {0} to {1}")]
    NoRedistributionPath(StateId, StateId),

    #[error("inconsistent count/parameter pair at {0}")]
    InconsistentCount(String),

    #[error(
        "gap position {gap} must lie strictly inside the sentinels of a length-{len} sequence"
    )]
    BadGap { gap: usize, len: usize },

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("no content tokens in {0:?}")]
    NoContentTokens(String),

    #[error("similarity matrix has no entry for ({0}, {1})")]
    MissingSimilarity(String, String),

    #[error("unknown method {name:?}; valid methods: {valid}")]
    UnknownMethod { name: String, valid: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}:{line}: {message}", .path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<input>".into()))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line,
            message: message.into(),
        }
    }

    pub(crate) fn with_path(self, path: &std::path::Path) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                path: Some(path.to_path_buf()),
                line,
                message,
            },
            other => other,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
