//! Evaluation of OPRA graph queries: path, regular and arithmetical
//! constraints over labelled graphs, with ontologies of auxiliary
//! labellings.

pub mod answer_graph;
pub mod automata;
pub mod corpus;
pub mod embedding;
pub mod engine;
pub mod error;
pub mod graph;
pub mod ontology;
pub mod oracle;
pub mod query;
pub mod solver;

pub use error::{Error, EvalError, Result};
