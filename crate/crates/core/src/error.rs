use std::fmt;

/// Where in an input text a problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub source: String,
    pub line: usize,
    pub column: Option<usize>,
}

impl Location {
    pub fn new(source: impl Into<String>, line: usize) -> Self {
        Location {
            source: source.into(),
            line,
            column: None,
        }
    }

    pub fn with_column(mut self, column: usize) -> Self {
        self.column = Some(column);
        self
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.source, self.line)?;
        if let Some(col) = self.column {
            write!(f, ":{col}")?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{location}: syntax error: {message}")]
    Syntax { location: Location, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("{location}: alignment mismatch: {message}")]
    Alignment { location: Location, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn syntax(location: Location, message: impl Into<String>) -> Self {
        Error::Syntax {
            location,
            message: message.into(),
        }
    }

    /// Re-anchors a location-free error (e.g. from a parse snippet) at a file line.
    pub(crate) fn at(self, source: &str, line: usize) -> Self {
        match self {
            Error::Format(message) => Error::Syntax {
                location: Location::new(source, line),
                message,
            },
            Error::Syntax { location, message } if location.line == 0 => Error::Syntax {
                location: Location {
                    source: source.to_string(),
                    line,
                    column: location.column,
                },
                message,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
