use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid character {character:?} at position {position}")]
    InvalidCharacter { position: usize, character: char },

    #[error("empty input sequence")]
    EmptyInput,

    #[error("rank {rank} out of range for l={l} (limit 4^{l})")]
    RankOutOfRange { rank: u64, l: usize },

    #[error("motif length {0} unsupported (must be 1..=31)")]
    InvalidMotifLength(usize),

    #[error("motif longer than sequence (l={l} > length {len})")]
    MotifLongerThanSequence { l: usize, len: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid rank range [{lo}, {hi}) for limit {limit}")]
    InvalidRange { lo: u64, hi: u64, limit: u64 },

    #[error("invalid worker count {0}")]
    InvalidWorkerCount(usize),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("dataset inconsistent: {0}")]
    Consistency(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("worker for ranks [{lo}, {hi}) failed: {reason}")]
    WorkerFailed { lo: u64, hi: u64, reason: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input or parameters rather than an
    /// internal failure.
    pub fn is_user_error(&self) -> bool {
        !matches!(
            self,
            Error::Io(_) | Error::WorkerFailed { .. } | Error::Consistency(_)
        )
    }
}
