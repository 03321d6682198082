use thiserror::Error;

use crate::map::{TagId, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed map file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("map failed validation: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("tags {0} and {1} are not joined by an edge")]
    NotAdjacent(TagId, TagId),

    #[error("unknown tag {0}")]
    UnknownTag(TagId),

    #[error("no path from tag {0} to tag {1}")]
    Unreachable(TagId, TagId),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("tag {0} has no neighbors")]
    NoNeighbors(TagId),

    #[error("unknown map {0:?}")]
    UnknownMap(String),

    #[error("unknown walk {0}")]
    UnknownWalk(u64),

    #[error("invalid keypad symbol {0:?}")]
    BadSymbol(String),

    #[error("malformed transcript line {line}: {source}")]
    Transcript {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
