//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any pipeline stage.
///
/// Parse errors carry the byte offset at which decoding failed so that
/// corrupt files can be diagnosed without a hex dump.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad magic at offset {offset}: expected {expected:?}, found {found:?}")]
    BadMagic {
        offset: u64,
        expected: [u8; 4],
        found: [u8; 4],
    },

    #[error("truncated stream at offset {offset}: needed {needed} more byte(s)")]
    Truncated { offset: u64, needed: usize },

    #[error("malformed stream at offset {offset}: {detail}")]
    Malformed { offset: u64, detail: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("frames must be pushed in decode order: expected index {expected}, got {got}")]
    OutOfOrderPush { expected: usize, got: usize },

    #[error("windows are not consecutive: previous index {prev}, current index {cur}")]
    NonConsecutiveWindows { prev: usize, cur: usize },

    #[error("retained mask is not group-complete: group {group} is partially retained")]
    NonGroupCompleteMask { group: usize },

    #[error("prefill plan inconsistent with cache segment: {0}")]
    PlanMismatch(String),

    #[error("missing cached embedding for anchor token at previous position {position}")]
    MissingAnchorEmbedding { position: usize },

    #[error("pipeline stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Tag an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
