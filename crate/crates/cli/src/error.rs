//! CLI error classification mapped onto process exit codes:
//! 1 usage, 2 numerical failure, 3 certificate does not hold.

use nsbox_core::CoreError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    CertificateFailed(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::CertificateFailed(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Numerical(m)
            | CliError::CertificateFailed(m)
            | CliError::Io(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::UnstableTimeStep { .. } | CoreError::NonFinite(_) => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
