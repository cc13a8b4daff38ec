use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain of the operation (wrong length,
    /// out-of-range value, ...).
    #[error("input domain: {0}")]
    InputDomain(String),

    /// Parameters that are individually valid but inconsistent with each
    /// other or with the cipher geometry.
    #[error("configuration: {0}")]
    Config(String),

    /// One side of a trace partition is empty, so no mean difference exists.
    #[error("degenerate partition: {positive} positive / {negative} negative samples")]
    DegeneratePartition { positive: usize, negative: usize },

    #[error("arithmetic overflow evaluating {0}")]
    Overflow(&'static str),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: malformed at {location}: {message}", path.display())]
    Parse {
        path: PathBuf,
        location: String,
        message: String,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::InputDomain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        path: impl Into<PathBuf>,
        location: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            location: location.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by reading or writing files, as opposed to bad
    /// parameters.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Parse { .. })
    }
}

pub(crate) fn ensure_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::domain(format!("{what}: length {got}, expected {want}")))
    }
}
