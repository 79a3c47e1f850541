use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,
    #[error("invalid time {0}")]
    InvalidTime(f64),
    #[error("empty curve")]
    EmptyCurve,
    #[error("invalid curve: {0}")]
    InvalidCurve(&'static str),
    #[error("need at least two groups")]
    NeedTwoGroups,
    #[error("empty group {0}")]
    EmptyGroup(String),
    #[error("group index {0} is not a declared group")]
    UnknownGroup(usize),
    #[error("no events")]
    NoEvents,
    #[error("singular covariance")]
    SingularCovariance,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("too large for exhaustive enumeration (n = {0}, limit {limit})", limit = crate::rank::permutation::EXHAUSTIVE_LIMIT)]
    TooLargeForExhaustive(usize),
    #[error("two groups only")]
    TwoGroupsOnly,
    #[error("invalid alpha {0}")]
    InvalidAlpha(f64),
    #[error("degenerate split: group {0} is empty")]
    DegenerateSplit(&'static str),
    #[error("out of scale: record {id} has score {score} outside [{min}, {max}]")]
    OutOfScale { id: String, score: f64, min: f64, max: f64 },
    #[error("invalid scale [{0}, {1}]")]
    InvalidScale(f64, f64),
    #[error("missing column {0}")]
    MissingColumn(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("bad number at line {0}")]
    BadNumber(u64),
    #[error("bad event flag at line {0}")]
    BadEventFlag(u64),
    #[error("empty group label at line {0}")]
    EmptyGroupLabel(u64),
    #[error("malformed csv: {0}")]
    Csv(String),
    #[error("malformed report: {0}")]
    Json(String),
    #[error("nothing to plot")]
    NothingToPlot,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
