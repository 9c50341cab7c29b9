use std::fmt;

/// Failure classes and their process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Unreadable or invalid input: exit 2.
    Config,
    /// Data violating a compatibility constraint: exit 3.
    Incompatible,
    /// A verification threshold failed: exit 4.
    Verification,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Incompatible => 3,
            ErrorKind::Verification => 4,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Incompatible => "incompatible",
            ErrorKind::Verification => "verification",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn incompatible(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Incompatible,
            message: message.into(),
        }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Verification,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

/// Single line: `error[<tag>]: <message>` with newlines flattened.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.kind.tag(), self.message.replace('\n', " "))
    }
}

impl std::error::Error for CliError {}
