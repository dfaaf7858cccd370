//! Concrete syntax, parser, printer and validation for OPRA queries.
//!
//! A query file holds optional file-local definitions followed by exactly
//! one query:
//!
//! ```text
//! const c_walk = 4;
//! def route = <E(@1, @1') = 1>* <>;
//! LET t_walk(x) := (type(x) = c_walk) * time(x) IN
//! MATCH NODES (s, t) SUCH THAT s -p-> t
//! WHERE route(p)
//! HAVING t_walk[p] <= 10
//! ```
//!
//! Sugar (derived comparisons and connectives in terms, term atoms in
//! `HAVING`) is removed by the parser, so the AST only holds core forms.

pub mod ast;
mod lexer;
mod parser;
mod printer;
mod validate;

use thiserror::Error;

pub use ast::*;
pub use parser::{parse, parse_regex, parse_term};
pub use printer::{print_query, print_regex, print_term};
pub use validate::{validate, ValidationError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl SyntaxError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        SyntaxError {
            line,
            col,
            message: message.into(),
        }
    }
}
