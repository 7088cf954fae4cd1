use std::path::PathBuf;

use fraisse_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("capacity: {0}")]
    Capacity(CoreError),
    #[error("{0}")]
    Semantic(CoreError),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verification(_) => 1,
            Self::Parse { .. } | Self::Io { .. } | Self::Malformed(_) => 2,
            Self::Capacity(_) => 3,
            Self::Semantic(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::DepthTooSmall { .. }
            | CoreError::ScheduleTooSmall(_)
            | CoreError::PadTooSmall { .. }
            | CoreError::BoundExceeded { .. }
            | CoreError::Unserviceable { .. } => Self::Capacity(e),
            e => Self::Semantic(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let depth = CoreError::DepthTooSmall {
            needed: 2,
            available: 1,
        };
        assert_eq!(CliError::from(depth).exit_code(), 3);
        let semantic = CoreError::NotNowhereDense { level: 1 };
        assert_eq!(CliError::from(semantic).exit_code(), 4);
        assert_eq!(CliError::Verification("x".into()).exit_code(), 1);
        assert_eq!(CliError::Malformed("x".into()).exit_code(), 2);
    }
}
