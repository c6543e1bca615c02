use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A located diagnostic from the type checker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("type errors: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Type(Vec<Diagnostic>),

    #[error("{what}: expected {expected} arguments, found {found}")]
    Arity {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("ill-typed value for `{symbol}`: {reason}")]
    IllTyped { symbol: String, reason: String },

    #[error("cap exceeded: {what} (limit {limit})")]
    Cap { what: &'static str, limit: usize },

    #[error("definition is not total: {0}")]
    NonTotal(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("template library: {0}")]
    Library(String),

    #[error("rewrite error: {0}")]
    Rewrite(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("structure: {0}")]
    Structure(String),
}

impl Error {
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::Cap { .. })
    }
}
