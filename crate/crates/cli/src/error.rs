use std::fmt;

/// Failure of a CLI operation, carrying the process exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed or invalid scenario. `line` is 1-based when known.
    Scenario {
        origin: String,
        line: Option<usize>,
        message: String,
    },
    /// Message already includes the origin.
    SizeCap(String),
    Degenerate(String),
    Io(String),
    Selftest(String),
}

impl CliError {
    pub fn scenario(origin: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        CliError::Scenario {
            origin: origin.to_string(),
            line,
            message: message.into(),
        }
    }

    /// Maps a library error raised while running `origin`.
    pub fn from_core(origin: &str, line: Option<usize>, err: latent_idm::Error) -> Self {
        use latent_idm::Error as E;
        match err {
            E::SizeCap { .. } => CliError::SizeCap(format!("{origin}: {err}")),
            E::Degenerate(_) => CliError::Degenerate(format!("{origin}: {err}")),
            _ => CliError::scenario(origin, line, err.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario { .. } | CliError::Io(_) | CliError::Selftest(_) => 1,
            CliError::SizeCap(_) => 2,
            CliError::Degenerate(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Scenario {
                origin,
                line: Some(line),
                message,
            } => write!(f, "{origin}:{line}: {message}"),
            CliError::Scenario {
                origin,
                line: None,
                message,
            } => write!(f, "{origin}: {message}"),
            CliError::SizeCap(m) | CliError::Degenerate(m) => f.write_str(m),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Selftest(m) => write!(f, "selftest failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;
