use std::path::PathBuf;

use crate::games::SpecViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("unknown IGT payoff scheme {0} (expected 1 or 2)")]
    UnknownScheme(u8),

    #[error("invalid game spec, violated: {}", join_violations(.0))]
    InvalidSpec(Vec<SpecViolation>),

    #[error("encoding error: action {index} outside alphabet of size {alphabet}")]
    Encoding { index: usize, alphabet: usize },

    #[error("parse error in {file}: row {row}, col {col}: {message}")]
    Parse {
        file: String,
        row: usize,
        col: usize,
        message: String,
    },

    #[error("length error: {0}")]
    Length(String),

    #[error("gap error: trajectory {traj_id} is missing round {round}")]
    Gap { traj_id: String, round: usize },

    #[error("degenerate trajectory {0}: need at least 2 steps")]
    Degenerate(String),

    #[error("no history: features need t >= 1")]
    NoHistory,

    #[error("game kind mismatch: expected {expected}, found {found}")]
    GameKind { expected: String, found: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("incompatible checkpoint and dataset: {0}")]
    Compatibility(String),

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

fn join_violations(v: &[SpecViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::UnknownScheme(_)
            | Error::InvalidSpec(_)
            | Error::Compatibility(_) => 2,
            Error::Numeric(_) => 4,
            _ => 3,
        }
    }
}
