use thiserror::Error;

pub type Result<T> = std::result::Result<T, CogsigError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CogsigError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("line {line}: timestamp {t} precedes previous timestamp {prev}")]
    NonMonotonicTimestamp { line: usize, prev: u64, t: u64 },

    #[error("log contains too few events")]
    EmptyLog,

    #[error("invalid quantization resolution {0} (must be >= 1 ms)")]
    InvalidResolution(u64),

    #[error("session is in privacy mode; text cannot be reconstructed")]
    PrivacyModeActive,

    #[error("event {event}: position {pos} out of range for document length {len}")]
    PositionOutOfRange { event: usize, pos: usize, len: usize },

    #[error("corpus contains no tokens")]
    EmptyCorpus,

    #[error("invalid n-gram configuration: {0}")]
    InvalidModel(String),

    #[error("document contains no words")]
    EmptyDocument,

    #[error("cannot align words to events: {0}")]
    AlignmentFailure(String),

    #[error("too few latency/complexity pairs: {0}")]
    TooFewPairs(usize),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("histogram is empty")]
    EmptyHistogram,

    #[error("need at least {needed} sessions, got {got}")]
    TooFewSessions { needed: usize, got: usize },

    #[error("series of length {len} is shorter than the required {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("series has no variance; spectrum is degenerate")]
    DegenerateSeries,

    #[error("invalid synthesis configuration: {0}")]
    InvalidConfig(String),

    #[error("analysis incomplete: {0}")]
    IncompleteAnalysis(String),

    #[error("serialization failure: {0}")]
    Serialization(String),

    #[error("invalid resolution list: {0}")]
    InvalidResolutionList(String),

    #[error("record is not content-free: {0}")]
    NotContentFree(String),

    #[error("records belong to different writers: {0}")]
    WriterMismatch(String),
}

impl CogsigError {
    /// Stable machine-readable identifier, used in CLI error output.
    pub fn code(&self) -> &'static str {
        match self {
            CogsigError::MalformedRecord { .. } => "MalformedRecord",
            CogsigError::NonMonotonicTimestamp { .. } => "NonMonotonicTimestamp",
            CogsigError::EmptyLog => "EmptyLog",
            CogsigError::InvalidResolution(_) => "InvalidResolution",
            CogsigError::PrivacyModeActive => "PrivacyModeActive",
            CogsigError::PositionOutOfRange { .. } => "PositionOutOfRange",
            CogsigError::EmptyCorpus => "EmptyCorpus",
            CogsigError::InvalidModel(_) => "InvalidModel",
            CogsigError::EmptyDocument => "EmptyDocument",
            CogsigError::AlignmentFailure(_) => "AlignmentFailure",
            CogsigError::TooFewPairs(_) => "TooFewPairs",
            CogsigError::InvalidParameters(_) => "InvalidParameters",
            CogsigError::EmptyHistogram => "EmptyHistogram",
            CogsigError::TooFewSessions { .. } => "TooFewSessions",
            CogsigError::SeriesTooShort { .. } => "SeriesTooShort",
            CogsigError::DegenerateSeries => "DegenerateSeries",
            CogsigError::InvalidConfig(_) => "InvalidConfig",
            CogsigError::IncompleteAnalysis(_) => "IncompleteAnalysis",
            CogsigError::Serialization(_) => "SerializationFailure",
            CogsigError::InvalidResolutionList(_) => "InvalidResolutionList",
            CogsigError::NotContentFree(_) => "NotContentFree",
            CogsigError::WriterMismatch(_) => "WriterMismatch",
        }
    }
}

impl From<serde_json::Error> for CogsigError {
    fn from(e: serde_json::Error) -> Self {
        CogsigError::Serialization(e.to_string())
    }
}
