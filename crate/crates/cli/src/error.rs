use std::fmt;

use qmarket_core::Error as CoreError;

/// Failure class; each maps to a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Config,
    Numerical,
    Tolerance,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Config => 2,
            Kind::Numerical => 3,
            Kind::Tolerance => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Config => "config",
            Kind::Numerical => "numerical",
            Kind::Tolerance => "tolerance",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Config,
            message: message.into(),
        }
    }

    pub fn tolerance(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Tolerance,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Numerical,
            message: message.into(),
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_line(&self) -> String {
        serde_json::json!({
            "status": "error",
            "kind": self.kind.as_str(),
            "exit_code": self.kind.exit_code(),
            "message": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind.as_str(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let kind = match &e {
            CoreError::InvalidParameter(_)
            | CoreError::ModeOutOfRange { .. }
            | CoreError::StateNotInBasis(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::GridMismatch(_) => Kind::Config,
            CoreError::WindowTooNarrow { .. } => Kind::Tolerance,
            _ => Kind::Numerical,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::config(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::config(format!("json: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
