// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("combinational cycle through gate `{0}`")]
    Cycle(String),
    #[error("undefined net `{0}`")]
    UndefinedNet(String),
    #[error("gate `{gate}` of type {kind} expects {expected} fan-ins, found {found}")]
    Arity {
        gate: String,
        kind: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("invalid netlist: {0}")]
    InvalidNetlist(String),
    #[error("input word {word:#x} out of range for {bits} input bits")]
    InputOutOfRange { word: u64, bits: usize },
    #[error("width mismatch: {0}")]
    WidthMismatch(String),
    #[error("input space of {bits} bits exceeds the exhaustive limit of {limit}")]
    InputSpaceTooLarge { bits: usize, limit: usize },
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: String },
    #[error("missing activity entry for net {0}")]
    MissingActivity(usize),
    #[error("measurement data: {0}")]
    Data(String),
    #[error("singular system while fitting {0}; consider raising the ridge penalty")]
    Singular(String),
    #[error("invalid hyperparameter for {kind}: {message}")]
    Hyperparameter { kind: String, message: String },
    #[error("unsupported model `{0}`")]
    UnsupportedModel(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("id sets differ: {0}")]
    IdMismatch(String),
    #[error("point `{0}` lies beyond the reference point")]
    BeyondReference(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("all model fits failed")]
    AllModelsFailed,
    #[error("library of {size} circuits exceeds the ground-truth budget of {cap}")]
    BudgetExceeded { size: usize, cap: usize },
    #[error("image: {0}")]
    Image(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn out_of_range(what: &'static str, value: impl ToString) -> Self {
        Error::OutOfRange {
            what,
            value: value.to_string(),
        }
    }
}
