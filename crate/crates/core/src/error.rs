use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Variants are grouped by the stage that raises them. [`Error::exit_code`]
/// maps them onto the command-line exit code contract.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // validation
    #[error("duplicate commit id `{0}`")]
    DuplicateId(String),
    #[error("commit `{commit}` is triggered by `{parent}`, which is unknown or not earlier")]
    DanglingTrigger { commit: String, parent: String },
    #[error("field `{field}` out of range in `{commit}`: {detail}")]
    FieldOutOfRange {
        commit: String,
        field: &'static str,
        detail: String,
    },
    #[error("agent `{0}` appears with more than one kind")]
    InconsistentAgentKind(String),

    // ingestion
    #[error("line {line}: malformed record: {detail}")]
    MalformedLine { line: usize, detail: String },
    #[error("line {line}: missing required field `{field}`")]
    MissingRequiredField { line: usize, field: String },
    #[error("line {line}: malformed header: {detail}")]
    MalformedHeader { line: usize, detail: String },
    #[error("line {line}: non-numeric numstat entry: {detail}")]
    NonNumericStat { line: usize, detail: String },
    #[error("conflicting evidence for `{commit}`: {detail}")]
    ConflictingEvidence { commit: String, detail: String },

    // measurement
    #[error("dependency graph has no nodes")]
    EmptyGraph,
    #[error("module weights sum to zero")]
    ZeroTotalWeight,
    #[error("partition does not cover module `{0}`")]
    UncoveredNode(String),
    #[error("event log is empty")]
    EmptyLog,
    #[error("graph needs at least {needed} nodes, got {got}")]
    TooFewNodes { needed: usize, got: usize },
    #[error("series too short: need {needed}, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("series are misaligned: {0}")]
    MisalignedSeries(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    // statistics
    #[error("need at least {needed} series per group, got {got}")]
    TooFewSeries { needed: usize, got: usize },
    #[error("need at least {needed} distinct agent levels with replicates, got {got}")]
    TooFewLevels { needed: usize, got: usize },
    #[error("no variation in {0}")]
    NoVariation(String),
    #[error("missing fields: {0}")]
    MissingFields(String),

    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code: 2 usage/validation, 3 I/O, 4 evidence conflict.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 3,
            Error::ConflictingEvidence { .. } => 4,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
