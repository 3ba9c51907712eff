use std::fmt;

use ergoflux_core::Error as CoreError;
use serde_json::json;

/// Failure categories, each with its own exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    Schema {
        path: String,
        message: String,
    },
    Physics(String),
    Compute(String),
    Io(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Syntax { .. } => "syntax",
            CliError::Schema { .. } => "schema",
            CliError::Physics(_) => "physics",
            CliError::Compute(_) => "compute",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Syntax { .. } => 65,
            CliError::Schema { .. } => 66,
            CliError::Physics(_) => 67,
            CliError::Compute(_) => 70,
            CliError::Io(_) => 74,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Physics(m) | CliError::Compute(m) | CliError::Io(m) => m,
            CliError::Syntax { message, .. } | CliError::Schema { message, .. } => message,
        }
    }

    /// Single-line JSON record for the diagnostic stream.
    pub fn to_record(&self) -> String {
        let mut v = json!({
            "error": self.category(),
            "code": self.exit_code(),
            "message": self.message(),
        });
        match self {
            CliError::Syntax { line, column, .. } => {
                v["line"] = json!(line);
                v["column"] = json!(column);
            }
            CliError::Schema { path, .. } => v["path"] = json!(path),
            _ => {}
        }
        v.to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.category(), self.message())
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain(_) | CoreError::Dimension { .. } | CoreError::DegenerateReference(_) => {
                CliError::Physics(e.to_string())
            }
            _ => CliError::Compute(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
