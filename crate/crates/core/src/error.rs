use std::path::PathBuf;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller supplied an argument outside the documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested instance exceeds what this build can hold (RAM, disk,
    /// or 64-bit index space). `required` / `available` are in bytes when the
    /// resource is memory or disk.
    #[error("capacity exceeded: {what} (required {required} bytes, available {available} bytes)")]
    Capacity {
        what: String,
        required: u64,
        available: u64,
    },

    /// Bad store/runtime configuration (budget too small, missing directory, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// I/O failure, annotated with the file and element offset being accessed.
    #[error("I/O error on {path} at element offset {offset}: {source}")]
    Io {
        path: PathBuf,
        offset: u64,
        #[source]
        source: std::io::Error,
    },

    /// A checkpoint/metadata file could not be parsed.
    #[error("corrupt metadata in {path}: {reason}")]
    Metadata { path: PathBuf, reason: String },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
