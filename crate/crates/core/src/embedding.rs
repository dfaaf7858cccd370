//! Edge-labelled data graphs and their translation into labelled graphs,
//! plus the graph of a weighted automaton's transitions.
//!
//! The embedding of a data graph `(V, E ⊆ V×Σ×V, λ: V → Z^K)` has nodes
//! `V ∪ Σ`, unary labellings `l1..lK` copying `λ` (zero on symbols) and a
//! ternary labelling `l{K+1}` that is 1 exactly on the edge triples. Symbol
//! nodes are named `sym:<symbol>`.

use std::collections::BTreeMap;

use serde_json::Value;
use thiserror::Error;

use crate::graph::{ExtInt, Graph, GraphError};
use crate::query::{Arg, Atom, Cmp, NodeConstraint, Regex};

pub const SYMBOL_PREFIX: &str = "sym:";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbeddingError {
    #[error("symbol `{0}` collides with a node name")]
    NameCollision(String),
    #[error("edge mentions unknown node `{0}`")]
    UnknownNode(String),
    #[error("edge mentions unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("node `{node}` has {found} labels, expected {expected}")]
    Dimension {
        node: String,
        expected: usize,
        found: usize,
    },
    #[error("transition weight {0} is not in {{-1, 0, 1}}")]
    InvalidWeight(i64),
    #[error("unknown automaton state `{0}`")]
    UnknownState(String),
    #[error("malformed data graph: {0}")]
    Format(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn symbol_node(sym: &str) -> String {
    format!("{SYMBOL_PREFIX}{sym}")
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DataGraph {
    pub nodes: Vec<String>,
    pub alphabet: Vec<String>,
    pub edges: Vec<(String, String, String)>,
    /// Per-node label vectors, all of length `dim`.
    pub labels: BTreeMap<String, Vec<i64>>,
    pub dim: usize,
}

impl DataGraph {
    pub fn label(&self, node: &str, i: usize) -> i64 {
        self.labels.get(node).map_or(0, |v| v[i])
    }

    pub fn from_json_str(s: &str) -> Result<DataGraph, EmbeddingError> {
        let v: Value = serde_json::from_str(s).map_err(|e| EmbeddingError::Format(e.to_string()))?;
        DataGraph::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<DataGraph, EmbeddingError> {
        let fmt = |m: &str| EmbeddingError::Format(m.to_string());
        let strings = |key: &str| -> Result<Vec<String>, EmbeddingError> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| fmt(&format!("missing `{key}` array")))?
                .iter()
                .map(|x| x.as_str().map(str::to_string).ok_or_else(|| fmt("expected a string")))
                .collect()
        };
        let nodes = strings("nodes")?;
        let alphabet = strings("alphabet")?;
        let mut edges = Vec::new();
        for e in v.get("edges").and_then(Value::as_array).ok_or_else(|| fmt("missing `edges`"))? {
            let parts: Vec<&str> = e
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| fmt("edges are [source, symbol, target]"))?
                .iter()
                .map(|x| x.as_str().ok_or_else(|| fmt("edge parts must be strings")))
                .collect::<Result<_, _>>()?;
            edges.push((parts[0].to_string(), parts[1].to_string(), parts[2].to_string()));
        }
        let mut labels = BTreeMap::new();
        if let Some(obj) = v.get("labels").and_then(Value::as_object) {
            for (node, vals) in obj {
                let vals: Vec<i64> = vals
                    .as_array()
                    .ok_or_else(|| fmt("labels are integer arrays"))?
                    .iter()
                    .map(|x| x.as_i64().ok_or_else(|| fmt("labels are integers")))
                    .collect::<Result<_, _>>()?;
                labels.insert(node.clone(), vals);
            }
        }
        let dim = labels.values().map(Vec::len).max().unwrap_or(0);
        let dg = DataGraph {
            nodes,
            alphabet,
            edges,
            labels,
            dim,
        };
        dg.check()?;
        Ok(dg)
    }

    fn check(&self) -> Result<(), EmbeddingError> {
        for (node, vals) in &self.labels {
            if !self.nodes.contains(node) {
                return Err(EmbeddingError::UnknownNode(node.clone()));
            }
            if vals.len() != self.dim {
                return Err(EmbeddingError::Dimension {
                    node: node.clone(),
                    expected: self.dim,
                    found: vals.len(),
                });
            }
        }
        for (u, a, w) in &self.edges {
            for n in [u, w] {
                if !self.nodes.contains(n) {
                    return Err(EmbeddingError::UnknownNode(n.clone()));
                }
            }
            if !self.alphabet.contains(a) {
                return Err(EmbeddingError::UnknownSymbol(a.clone()));
            }
        }
        Ok(())
    }
}

/// Name of the ternary edge labelling in the embedding of `dg`.
pub fn edge_labelling(dim: usize) -> String {
    format!("l{}", dim + 1)
}

pub fn embed(dg: &DataGraph) -> Result<Graph, EmbeddingError> {
    dg.check()?;
    for a in &dg.alphabet {
        if dg.nodes.iter().any(|n| n == a || *n == symbol_node(a)) {
            return Err(EmbeddingError::NameCollision(a.clone()));
        }
    }
    let mut b = Graph::builder();
    for n in &dg.nodes {
        b.node(n)?;
    }
    for a in &dg.alphabet {
        b.node(&symbol_node(a))?;
    }
    for i in 0..dg.dim {
        let name = format!("l{}", i + 1);
        b.labelling(&name, 1, ExtInt::ZERO)?;
        for (node, vals) in &dg.labels {
            if vals[i] != 0 {
                b.set(&name, &[node], vals[i])?;
            }
        }
    }
    let el = edge_labelling(dg.dim);
    b.labelling(&el, 3, ExtInt::ZERO)?;
    for (u, a, w) in &dg.edges {
        let sym = symbol_node(a);
        let ids = vec![b.id(u)?, b.id(&sym)?, b.id(w)?];
        // repeated edges in the input are the same triple
        b.set_ids(&el, ids, ExtInt::ONE, false)?;
    }
    Ok(b.build())
}

/// Node constraint for one step along an `a`-labelled edge of the data
/// graph, over a path that visits only data nodes.
pub fn edge_letter(dim: usize, sym: &str) -> Regex {
    Regex::Letter(NodeConstraint {
        lhs: Atom::Lab {
            name: edge_labelling(dim),
            args: vec![
                Arg::Pos { index: 1, next: false },
                Arg::Node(symbol_node(sym)),
                Arg::Pos { index: 1, next: true },
            ],
        },
        op: Cmp::Eq,
        rhs: Atom::Const(1),
    })
}

/// Weighted automaton with weights in {-1, 0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeightedAutomaton {
    pub states: Vec<String>,
    pub initial: Vec<String>,
    pub finals: Vec<String>,
    /// `(source, letter, weight, target)`.
    pub transitions: Vec<(String, String, i64, String)>,
}

/// One node `t{i}` per transition, with unary labellings `c` (weight), `a`
/// (letter code, from 1 in sorted letter order), `s` / `f` (starts in an
/// initial state / ends in a final state) and binary `E` chaining
/// transitions whose target is the next one's source.
pub fn build_automaton_graph(wa: &WeightedAutomaton) -> Result<Graph, EmbeddingError> {
    for (src, _, w, dst) in &wa.transitions {
        if !(-1..=1).contains(w) {
            return Err(EmbeddingError::InvalidWeight(*w));
        }
        for s in [src, dst] {
            if !wa.states.contains(s) {
                return Err(EmbeddingError::UnknownState(s.clone()));
            }
        }
    }
    let mut letters: Vec<&str> = wa.transitions.iter().map(|t| t.1.as_str()).collect();
    letters.sort_unstable();
    letters.dedup();
    let code = |l: &str| letters.iter().position(|x| *x == l).unwrap() as i64 + 1;

    let mut b = Graph::builder();
    let names: Vec<String> = (0..wa.transitions.len()).map(|i| format!("t{i}")).collect();
    for n in &names {
        b.node(n)?;
    }
    for l in ["c", "a", "s", "f"] {
        b.labelling(l, 1, ExtInt::ZERO)?;
    }
    b.labelling("E", 2, ExtInt::ZERO)?;
    for (i, (src, letter, w, dst)) in wa.transitions.iter().enumerate() {
        let n = names[i].as_str();
        b.set("c", &[n], *w)?;
        b.set("a", &[n], code(letter))?;
        b.set("s", &[n], i64::from(wa.initial.contains(src)))?;
        b.set("f", &[n], i64::from(wa.finals.contains(dst)))?;
        for (j, (src2, ..)) in wa.transitions.iter().enumerate() {
            if dst == src2 {
                b.set("E", &[n, names[j].as_str()], 1)?;
            }
        }
    }
    Ok(b.build())
}

/// Runs of the automaton as routes of its transition graph, from an
/// initial transition to a final one; minimize `c[p]` to get the least run
/// value.
pub const AUTOMATON_RUN_QUERY: &str = "MATCH PATHS (p) \
    WHERE (<E(@1, @1') = 1>* <>)(p) AND (<s(@1) = 1> <>*)(p) AND (<>* <f(@1) = 1>)(p)";

#[cfg(test)]
mod tests {
    use super::*;

    fn dg1() -> DataGraph {
        DataGraph::from_json_str(
            r#"{"nodes":["u","w"],"alphabet":["a"],"edges":[["u","a","w"]],"labels":{"u":[7],"w":[0]}}"#,
        )
        .unwrap()
    }

    #[test]
    fn unary_and_edge_labellings() {
        let g = embed(&dg1()).unwrap();
        let u = g.node("u").unwrap();
        let w = g.node("w").unwrap();
        let a = g.node("sym:a").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.label_value("l1", &[u]).unwrap(), 7);
        assert_eq!(g.label_value("l1", &[a]).unwrap(), 0);
        assert_eq!(g.label_value("l2", &[u, a, w]).unwrap(), 1);
        assert_eq!(g.label_value("l2", &[w, a, u]).unwrap(), 0);
    }

    #[test]
    fn collision_detected() {
        let mut dg = dg1();
        dg.alphabet.push("u".into());
        assert_eq!(embed(&dg), Err(EmbeddingError::NameCollision("u".into())));
    }

    #[test]
    fn single_transition_graph() {
        let wa = WeightedAutomaton {
            states: vec!["q0".into(), "q1".into()],
            initial: vec!["q0".into()],
            finals: vec!["q1".into()],
            transitions: vec![("q0".into(), "a".into(), -1, "q1".into())],
        };
        let g = build_automaton_graph(&wa).unwrap();
        let t = g.node("t0").unwrap();
        assert_eq!(g.label_value("c", &[t]).unwrap(), -1);
        assert_eq!(g.label_value("s", &[t]).unwrap(), 1);
        assert_eq!(g.label_value("f", &[t]).unwrap(), 1);
        assert_eq!(g.label_value("a", &[t]).unwrap(), 1);
        assert_eq!(g.label_value("E", &[t, t]).unwrap(), 0);
    }

    #[test]
    fn chained_transitions() {
        let wa = WeightedAutomaton {
            states: vec!["q0".into(), "q1".into(), "q2".into()],
            initial: vec!["q0".into()],
            finals: vec!["q2".into()],
            transitions: vec![
                ("q0".into(), "b".into(), 0, "q1".into()),
                ("q1".into(), "a".into(), 1, "q2".into()),
            ],
        };
        let g = build_automaton_graph(&wa).unwrap();
        let (t0, t1) = (g.node("t0").unwrap(), g.node("t1").unwrap());
        assert_eq!(g.label_value("E", &[t0, t1]).unwrap(), 1);
        assert_eq!(g.label_value("E", &[t1, t0]).unwrap(), 0);
        assert_eq!(g.label_value("a", &[t0]).unwrap(), 2);
        assert!(build_automaton_graph(&WeightedAutomaton {
            transitions: vec![("q0".into(), "a".into(), 2, "q0".into())],
            states: vec!["q0".into()],
            ..Default::default()
        })
        .is_err());
    }
}
