use thiserror::Error;

/// Crate-wide error type. Variants map onto the CLI exit codes: schema,
/// validation and I/O problems are data errors (exit 3), everything about
/// parameters and configuration is a configuration error (exit 2).
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("state error: {0}")]
    State(String),

    #[error("fitness undefined: {0}")]
    UndefinedFitness(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("baseline fitting error: {0}")]
    Fitting(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code for this error: 2 for configuration problems, 3 for
    /// data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::Config(_) | Error::Unsupported(_) | Error::State(_) => 2,
            _ => 3,
        }
    }
}
