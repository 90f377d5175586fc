use thiserror::Error;

/// Process exit codes. Disjoint by construction.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const BREAKDOWN_SLOPE: u8 = 3;
    pub const BREAKDOWN_NONFINITE: u8 = 4;
    pub const ELLIPTIC: u8 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization error: {0}")]
    Serialize(String),
    #[error("elliptic solve failed: {0}")]
    Elliptic(coldplasma::Error),
    #[error(transparent)]
    Core(#[from] coldplasma::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Elliptic(_) => exit::ELLIPTIC,
            CliError::Io { .. } | CliError::Serialize(_) | CliError::Core(_) => exit::IO,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Serialize(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Serialize(e.to_string())
    }
}
