use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scalar argument violated its domain.
    #[error("invalid {name}: {value} (must satisfy {constraint})")]
    InvalidParameter {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },

    #[error("sample is empty")]
    EmptySample,

    #[error("count at index {index} is not a nonnegative number: {value}")]
    InvalidCount { index: usize, value: f64 },

    #[error("at least {required} observations are needed, got {n}")]
    TooFewObservations { n: usize, required: usize },

    /// The sample (or an intermediate evaluation) sits on a singularity of the
    /// estimating equations, e.g. `log ĝ(1/2) = 0` for an all-zero sample.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("non-finite value in {what}{}", replicate.map(|r| format!(" (replicate {r})")).unwrap_or_default())]
    NonFinite {
        what: &'static str,
        replicate: Option<usize>,
    },

    #[error("misuse: {0}")]
    Misuse(&'static str),

    #[error("config error: {message}")]
    Config { key: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, constraint: &'static str, value: f64) -> Self {
        Error::InvalidParameter {
            name,
            constraint,
            value,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
