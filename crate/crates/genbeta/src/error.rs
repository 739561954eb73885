use thiserror::Error;

/// Crate-wide error type.
///
/// `Domain` means a precondition on arguments or parameters was violated;
/// `Numeric` means an iterative routine (series, quadrature, root bracket,
/// optimizer) failed to converge and carries the best value reached so far
/// when one exists.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {context}{}", partial.map(|v| format!(" (partial value {v})")).unwrap_or_default())]
    Numeric {
        context: String,
        partial: Option<f64>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(context: impl Into<String>, partial: Option<f64>) -> Self {
        Error::Numeric {
            context: context.into(),
            partial,
        }
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Process exit code used by the CLI: usage/input problems exit with 2,
    /// numeric failures with 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
