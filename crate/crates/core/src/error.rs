use thiserror::Error;

use crate::graph::GraphError;
use crate::query::{SyntaxError, ValidationError};

/// Failures while evaluating labellings, terms, answer graphs or solver runs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("indeterminate sum: +inf and -inf combined")]
    IndeterminateSum,

    #[error("integer overflow")]
    Overflow,

    #[error("visited budget of {budget} states exceeded")]
    ResourceExceeded { budget: usize },

    #[error("ontology recursion deeper than {limit}")]
    RecursionDepthExceeded { limit: usize },

    #[error("oracle enumeration cap of {cap} path-tuple prefixes exceeded")]
    EnumerationCapExceeded { cap: usize },

    #[error("unknown labelling `{0}`")]
    UnknownLabelling(String),

    #[error("labelling `{name}` has arity {expected}, applied to {found} arguments")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid solver configuration: {0}")]
    Config(String),

    #[error("invalid binding: {0}")]
    Binding(String),

    #[error(transparent)]
    Validation(#[from] Box<ValidationError>),
}

impl From<ValidationError> for EvalError {
    fn from(e: ValidationError) -> Self {
        EvalError::Validation(Box::new(e))
    }
}

/// Crate-level error, qualified by the module the failure came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph: {0}")]
    Graph(#[from] GraphError),

    #[error("query: {0}")]
    Syntax(#[from] SyntaxError),

    #[error("validate: {0}")]
    Validation(#[from] ValidationError),

    #[error("eval: {0}")]
    Eval(#[from] EvalError),

    #[error("embedding: {0}")]
    Embedding(#[from] crate::embedding::EmbeddingError),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
