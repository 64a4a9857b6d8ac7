use thiserror::Error;

#[derive(Debug, Error)]
pub enum HsiError {
    /// A parameter is outside its domain (even window, k >= n, d > D, ...).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("index out of bounds: {0}")]
    Bounds(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The numerical problem has no unique solution with the given settings.
    #[error("singular system: {0}")]
    Singular(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HsiError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        HsiError::Config(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        HsiError::Shape(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        HsiError::Format {
            offset,
            message: msg.into(),
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            HsiError::Config(_) => 1,
            HsiError::Bounds(_) | HsiError::Shape(_) | HsiError::Format { .. } | HsiError::Io(_) => 2,
            HsiError::Singular(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HsiError>;
