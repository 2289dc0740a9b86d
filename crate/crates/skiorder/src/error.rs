//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: no signals provided")]
    EmptyInput,

    #[error("agent {agent} has {found} samples, expected {expected}")]
    LengthMismatch {
        agent: usize,
        expected: usize,
        found: usize,
    },

    #[error("need at least 2 timesteps, got {found}")]
    TooFewSteps { found: usize },

    #[error("degenerate matrix: all {dropped} rows have population std <= {floor:e}")]
    DegenerateMatrix { dropped: usize, floor: f64 },

    #[error("invalid shape {rows}x{cols}: both dimensions must be nonzero")]
    InvalidShape { rows: usize, cols: usize },

    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    SvdFailed { rows: usize, cols: usize },

    #[error("matrix of shape {rows}x{cols} has numerical rank 0")]
    RankZero { rows: usize, cols: usize },

    #[error("knee undefined: numerical rank {rank} < 3")]
    KneeUndefined { rank: usize },

    #[error("zero-length vector in knee geometry: {0}")]
    ZeroVector(&'static str),

    #[error("unknown model '{got}' (expected one of: {expected})")]
    UnknownModel { got: String, expected: String },

    #[error("simulation of model '{model}' diverged: non-finite state at step {step}")]
    SimulationDiverged { model: &'static str, step: usize },

    #[error("rule index {index} out of range for table of size {size}")]
    RuleIndexOutOfRange { index: usize, size: usize },

    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),

    #[error("invalid cellular-automaton config: {0}")]
    InvalidCaConfig(String),

    #[error("cannot summarize an empty sample")]
    EmptySample,

    #[error("parse error at row {row}, column {col}: {msg}")]
    ParseCell { row: usize, col: usize, msg: String },

    #[error("malformed csv: {0}")]
    CsvStructure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
