use thiserror::Error;

use crate::graph::GraphError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    /// Static-semantics violation, named by rule.
    #[error("{rule} at {line}:{col}: {message}")]
    Static { rule: &'static str, line: usize, col: usize, message: String },
}

impl ParseError {
    pub fn rule(&self) -> Option<&'static str> {
        match self {
            ParseError::Static { rule, .. } => Some(rule),
            ParseError::Syntax { .. } => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("type error: {0}")]
    Type(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cost error: {0}")]
    Cost(String),
    #[error("unknown graph '{0}'")]
    UnknownGraph(String),
    #[error("no graph given with ON and no default graph is set")]
    NoDefaultGraph,
    #[error("unknown path view '{0}'")]
    UnknownView(String),
    #[error("cyclic view reference through '{0}'")]
    Cycle(String),
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error("aggregate {0} is only allowed in CONSTRUCT")]
    MisplacedAggregate(&'static str),
    #[error("WHEN condition evaluated to {0}, expected a boolean")]
    When(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed graph file: {message}")]
    Format { path: String, message: String },
    #[error("{path}: invalid graph: {}", .violations.join("; "))]
    Invalid { path: String, violations: Vec<String> },
    #[error("{path}: {message}")]
    Csv { path: String, message: String },
    #[error("unknown graph or view '{0}'")]
    Unknown(String),
    #[error("name '{0}' is already registered")]
    Duplicate(String),
    #[error("view '{0}' would create a cyclic reference")]
    Cycle(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Any failure of the public API.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Storage(#[from] StorageError),
}
