use std::path::PathBuf;

use crate::store::Shape;

/// Errors surfaced by the engine. `Script`-class errors map to CLI exit
/// code 1, `Io`-class errors to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("not a riot matrix file ({path}): {reason}")]
    BadHeader { path: PathBuf, reason: String },

    #[error("shape mismatch in {context}: {left} vs {right}")]
    ShapeMismatch {
        context: String,
        left: Shape,
        right: Shape,
    },

    #[error("invalid shape: rows={rows}, cols={cols}")]
    InvalidShape { rows: u64, cols: u64 },

    #[error("tile coordinates ({ti}, {tj}) outside tile grid {grid_rows}x{grid_cols}")]
    TileOutOfGrid {
        ti: u64,
        tj: u64,
        grid_rows: u64,
        grid_cols: u64,
    },

    #[error("index {value} out of range 1..={bound}")]
    IndexOutOfRange { value: i64, bound: u64 },

    #[error("buffer pool exhausted: all {frames} frames are pinned (planner bug)")]
    PoolExhausted { frames: u64 },

    #[error("memory budget too small: M={memory} scalars, need at least {needed} (3 blocks of {block})")]
    BudgetTooSmall {
        memory: u64,
        block: u64,
        needed: u64,
    },

    #[error("memory budget M={memory} is not a multiple of the block size B={block}")]
    BudgetNotBlockAligned { memory: u64, block: u64 },

    #[error("plan needs {needed} buffer frames but the budget provides only {available}")]
    WorkingSetTooLarge { needed: u64, available: u64 },

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("parse error at line {line}, column {col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("{0}")]
    Unsupported(String),

    #[error("data stream has {got} values, expected {expected}")]
    StreamLength { expected: u64, got: u64 },

    #[error("sample size {k} exceeds population {n}")]
    SampleTooLarge { n: u64, k: u64 },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the environment (filesystem, corrupt files)
    /// rather than by the program being evaluated.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::BadHeader { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
