use thiserror::Error;

#[derive(Debug, Error)]
pub enum AsgError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("dimension mismatch ({context}): expected {expected}, found {found}")]
    Dimension {
        expected: usize,
        found: usize,
        context: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl AsgError {
    pub(crate) fn dimension(expected: usize, found: usize, context: impl Into<String>) -> Self {
        AsgError::Dimension {
            expected,
            found,
            context: context.into(),
        }
    }

    /// True for errors caused by the input data rather than by the program.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            AsgError::Io(_)
                | AsgError::Parse { .. }
                | AsgError::Dimension { .. }
                | AsgError::EmptyInput(_)
                | AsgError::InsufficientData(_)
                | AsgError::Csv(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, AsgError>;
