//! Recursive estimation-error lower bounds for single-target tracking when
//! both the target state and the measurement are set-valued: the target may
//! be absent, may appear or disappear between scans, and the sensor detects
//! it with probability `pd < 1` (no false alarms).
//!
//! The bound conditions on the detection/miss history of every scan. Over
//! `k` scans there are `2^k` such histories; for each one the library tracks
//! three scalars (history probability, joint probability that the target is
//! absent, conditional probability that the next scan is empty) and one
//! Fisher information matrix, all advanced by closed-form recursions. The
//! per-history terms combine into a single error matrix per scan.
//!
//! Modules:
//! - [`linalg`]: small dense matrices with deterministic reductions
//! - [`models`]: motion/measurement models and Bernoulli existence parameters
//! - [`seqtree`]: the per-history scalar recursions over the binary tree
//! - [`fim`]: Fisher information recursions (noisy and noiseless dynamics)
//! - [`bound`]: per-history bound assembly and full bound series
//! - [`scenarios`]: two built-in scenarios (linear CV, bearings-only)
//! - [`mcval`]: Bernoulli particle filter Monte Carlo validation
//! - [`cli`]: run configuration, config-file parsing, CSV emission

pub mod bound;
pub mod cli;
pub mod fim;
pub mod linalg;
pub mod mcval;
pub mod models;
pub mod scenarios;
pub mod seqtree;

use thiserror::Error;

/// Library error type. The variant name doubles as the machine-parsable
/// error code printed by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// A symmetric factorization hit a non-positive pivot: the matrix is not
    /// positive definite.
    #[error("NotSpd: {0}")]
    NotSpd(String),

    /// A general matrix inversion hit a zero pivot column.
    #[error("SingularF: {0}")]
    SingularF(String),

    /// Bearing of the zero relative-position vector is undefined.
    #[error("OriginSingularity: relative position is at the sensor origin")]
    OriginSingularity,

    /// A recursion input left its mathematically valid range by more than
    /// the accepted slack.
    #[error("DomainError: {0}")]
    Domain(String),

    /// A parameter failed its range check.
    #[error("InvalidParams: {0}")]
    InvalidParams(String),

    /// The requested scan count exceeds the configured node/memory cap.
    #[error("CapExceeded: {0}")]
    CapExceeded(String),

    /// Every particle weight underflowed to zero in a measurement update.
    #[error("DegenerateWeights: all particle weights vanished at scan {scan}")]
    DegenerateWeights { scan: usize },

    /// A run-configuration file or flag set is invalid.
    #[error("ConfigError: {0}")]
    Config(String),

    /// File system failure while reading config or writing results.
    #[error("IoError: {0}")]
    Io(String),
}

impl Error {
    /// Machine-parsable code for the CLI error line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSpd(_) => "NotSpd",
            Error::SingularF(_) => "SingularF",
            Error::OriginSingularity => "OriginSingularity",
            Error::Domain(_) => "DomainError",
            Error::InvalidParams(_) => "InvalidParams",
            Error::CapExceeded(_) => "CapExceeded",
            Error::DegenerateWeights { .. } => "DegenerateWeights",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
