use std::fmt;

/// Library-wide error type. Variants are coarse on purpose: callers switch on
/// the class of failure (usage vs numerical vs I/O), not on details.
#[derive(Debug)]
pub enum Error {
    /// Shape mismatch in a matrix/vector operation.
    Dim {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    /// Invalid configuration or argument value (bad bounds, widths, ids...).
    Param(String),
    /// A basis interval collapsed (e ≤ s) where a positive width is required.
    DegenerateBasis { s: f64, e: f64 },
    /// Training produced a non-finite loss; `iteration` is 1-based.
    NonFinite { iteration: usize },
    /// A cache or state object was used against a mismatched layer/network.
    Contract(&'static str),
    Io(std::io::Error),
    /// Checkpoint or input text could not be parsed.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dim { op, lhs, rhs } => write!(
                f,
                "dimension mismatch in {op}: {}x{} vs {}x{}",
                lhs.0, lhs.1, rhs.0, rhs.1
            ),
            Error::Param(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DegenerateBasis { s, e } => {
                write!(f, "degenerate basis interval: s={s} e={e} (need e > s)")
            }
            Error::NonFinite { iteration } => {
                write!(f, "non-finite loss at iteration {iteration}")
            }
            Error::Contract(msg) => write!(f, "contract violation: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
