use thiserror::Error;

/// Errors produced while parsing, validating, or transforming diagrams.
#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("diagram is not realizable in the plane: {0}")]
    NonPlanar(String),

    #[error("move rejected: {0}")]
    BadMove(String),

    #[error("replay hash mismatch at step {step}: expected {expected:#018x}, got {got:#018x}")]
    ReplayMismatch { step: usize, expected: u64, got: u64 },

    #[error("operation not applicable: {0}")]
    NotApplicable(String),

    #[error("work limit exceeded: {0}")]
    LimitExceeded(String),

    #[error("certification failed: {0}")]
    Certification(String),
}

pub type Result<T> = std::result::Result<T, DiagramError>;
