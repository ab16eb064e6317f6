use std::fmt;

use thiserror::Error;

/// A concrete witness that a distance matrix is not a metric.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricViolation {
    NonFinite {
        u: usize,
        v: usize,
    },
    Negative {
        u: usize,
        v: usize,
    },
    NonZeroDiagonal {
        u: usize,
    },
    Asymmetric {
        u: usize,
        v: usize,
    },
    /// `d(u, w) > d(u, v) + d(v, w)`
    Triangle {
        u: usize,
        v: usize,
        w: usize,
    },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::NonFinite { u, v } => write!(f, "non-finite distance at ({u},{v})"),
            MetricViolation::Negative { u, v } => write!(f, "negative distance at ({u},{v})"),
            MetricViolation::NonZeroDiagonal { u } => write!(f, "non-zero self distance at ({u},{u})"),
            MetricViolation::Asymmetric { u, v } => write!(f, "asymmetric distances at ({u},{v})"),
            MetricViolation::Triangle { u, v, w } => {
                write!(f, "triangle inequality fails: d({u},{w}) > d({u},{v}) + d({v},{w})")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("solution is empty")]
    EmptySolution,
    #[error("index {index} out of range (size {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("all pairwise distances are zero")]
    DegenerateMetric,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("pattern references a part that does not exist")]
    EmptyPart,
    #[error("block {0} is empty")]
    EmptyBlock(usize),
    #[error("candidate set {0} is empty")]
    EmptyCandidate(usize),
    #[error("instance is infeasible: no k facilities meet the group requirements")]
    Infeasible,
    #[error("groups {a} and {b} are not disjoint")]
    NotDisjoint { a: usize, b: usize },
    #[error("requirements sum to {sum} but k = {k}")]
    RequirementSumMismatch { sum: usize, k: usize },
    #[error("enumeration of {count} candidates exceeds cap {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("metric violation: {0}")]
    Metric(MetricViolation),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
