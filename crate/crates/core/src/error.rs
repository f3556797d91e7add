use thiserror::Error;

use crate::linearized::ParseError;
use crate::table::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("invalid table: {}", summarize(.0))]
    InvalidTable(Vec<Violation>),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("rules file: {0}")]
    Rules(String),

    #[error("unsupported rules file version {0}")]
    UnsupportedVersion(u32),

    #[error("template `{0}` has no placeholder")]
    MissingPlaceholder(String),

    #[error("template `{0}` has more than one placeholder")]
    DuplicatePlaceholder(String),

    #[error("unknown template `{0}`")]
    UnknownTemplate(String),

    #[error("error reduction is undefined when the before count is zero")]
    DivisionByZero,

    #[error("item {item} has {found} labels, expected {expected}")]
    ArityMismatch {
        item: String,
        expected: usize,
        found: usize,
    },

    #[error("rating matrix: {0}")]
    RatingMatrix(String),

    #[error("agreement is undefined: chance agreement is 1 but observed agreement is not")]
    DegenerateAgreement,

    #[error("edit replay failed at edit {index}: {message}")]
    Replay { index: usize, message: String },

    #[error("annotation file: {0}")]
    Annotation(String),
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.message.as_str())
        .collect::<Vec<_>>()
        .join("; ")
}
