use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A line of a run or qrels file could not be parsed.
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    /// Strict single-relevance policy violated.
    #[error("query {query} has {count} relevant documents; strict policy allows exactly one")]
    Multiplicity { query: String, count: usize },

    #[error("qrels contain no relevant judgments")]
    EmptyQrels,

    #[error("at least one run is required")]
    NoRuns,

    /// Aggregate over an empty query subset.
    #[error("aggregate over an empty query set is undefined")]
    EmptySubset,

    /// A query without a retrieved relevant document in an ESL average.
    #[error("ESL is undefined for query {0}: relevant document not retrieved")]
    UndefinedEsl(String),

    #[error("query {0} is not part of the score table")]
    UnknownQuery(String),

    #[error("score tables do not share the same query universe and cutoff")]
    UniverseMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid date {0:?}: expected YYYY-MM-DD")]
    InvalidDate(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error("json: {0}")]
    Json(String),
}

impl Error {
    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(reason: impl Into<String>) -> Self {
        Error::InvalidArgument(reason.into())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
