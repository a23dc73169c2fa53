use thiserror::Error;
use vexlab_core::VexError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage error: --{flag}: {message}")]
    Usage { flag: String, message: String },

    #[error("spec error: {0}")]
    Spec(String),

    #[error(transparent)]
    Core(#[from] VexError),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl HarnessError {
    pub fn usage(flag: &str, message: impl Into<String>) -> Self {
        HarnessError::Usage { flag: flag.into(), message: message.into() }
    }

    /// 2 for anything wrong with the request, 1 for a computation that
    /// could not be completed.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Usage { .. } | HarnessError::Spec(_) | HarnessError::Io { .. } => 2,
            HarnessError::Core(e) => match e {
                VexError::NonFiniteSample { .. } | VexError::BracketFailure(_) => 1,
                _ => 2,
            },
        }
    }
}

/// Turns configuration-level core errors into spec errors so the message
/// names the input that was rejected.
pub fn spec_error(what: &str, e: VexError) -> HarnessError {
    HarnessError::Spec(format!("{what}: {e}"))
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;
