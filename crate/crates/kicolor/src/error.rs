use thiserror::Error;

/// Errors shared by all solver modules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed input text (DIMACS graph, DIMACS CNF, coloring or FVS files).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A precondition on values was violated (out-of-range color, improper
    /// coloring, a set that is not an FVS, ...).
    #[error("{0}")]
    Domain(String),

    /// Palettes wider than one machine word are not supported.
    #[error("palette of {0} colors exceeds the supported maximum of 64")]
    UnsupportedPalette(u64),

    /// A configured work budget (node expansions, table sizes) was exceeded.
    #[error("resource budget exceeded: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
