//! Regular constraints compiled to automata over symbolic node-constraint
//! letters.

mod nfa;

pub use nfa::{compare, compile, eval_node_constraint, Letter, LetterId, Nfa};
