//! Labelled graphs: a finite node set containing the sink node plus named
//! labellings from node tuples to extended integers.
//!
//! Paths are node sequences indexed from 1; indexing past the end yields
//! [`SINK`], which is how tuples of paths of different lengths line up
//! position by position.

mod ext_int;
mod json;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use ext_int::{ExtInt, Fin, NegInf, PosInf};

use crate::error::EvalError;

/// Dense node identifier. `NodeId(0)` is always the sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

pub const SINK: NodeId = NodeId(0);

/// Display name of the sink node. Never a valid name in graph files.
pub const SINK_NAME: &str = "□";

impl NodeId {
    pub fn is_sink(self) -> bool {
        self == SINK
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown labelling `{0}`")]
    UnknownLabelling(String),

    #[error("labelling `{name}` has arity {expected}, got a tuple of length {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("duplicate labelling `{0}`")]
    DuplicateLabelling(String),

    #[error("duplicate node `{0}`")]
    DuplicateNode(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("labelling `{0}` has arity 0; arities must be positive")]
    ZeroArity(String),

    #[error("labelling `{name}`: duplicate entry for tuple {tuple:?}")]
    DuplicateEntry { name: String, tuple: Vec<String> },

    #[error("malformed graph file: {0}")]
    Format(String),
}

impl From<GraphError> for EvalError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::ArityMismatch {
                name,
                expected,
                found,
            } => EvalError::ArityMismatch {
                name,
                expected,
                found,
            },
            GraphError::UnknownLabelling(n) => EvalError::UnknownLabelling(n),
            other => EvalError::UnknownLabelling(other.to_string()),
        }
    }
}

/// A sparse labelling with an explicit default. Tuples containing the sink
/// always evaluate to the default.
#[derive(Debug, Clone, PartialEq)]
pub struct Labelling {
    name: String,
    arity: usize,
    default: ExtInt,
    entries: HashMap<Vec<NodeId>, ExtInt>,
}

impl Labelling {
    pub fn new(name: impl Into<String>, arity: usize, default: ExtInt) -> Self {
        Labelling {
            name: name.into(),
            arity,
            default,
            entries: HashMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn default_value(&self) -> ExtInt {
        self.default
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[NodeId], ExtInt)> {
        self.entries.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn get(&self, tuple: &[NodeId]) -> ExtInt {
        if tuple.iter().any(|n| n.is_sink()) {
            return self.default;
        }
        self.entries.get(tuple).copied().unwrap_or(self.default)
    }
}

/// Immutable labelled graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    labellings: Vec<Labelling>,
    label_index: HashMap<String, usize>,
}

impl Graph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    /// Non-sink nodes, in insertion order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (1..self.names.len() as u32).map(NodeId)
    }

    /// Number of non-sink nodes.
    pub fn node_count(&self) -> usize {
        self.names.len() - 1
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        if name == SINK_NAME {
            return Some(SINK);
        }
        self.index.get(name).copied()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.index()]
    }

    pub fn labellings(&self) -> &[Labelling] {
        &self.labellings
    }

    pub fn labelling(&self, name: &str) -> Option<&Labelling> {
        self.label_index.get(name).map(|&i| &self.labellings[i])
    }

    pub fn labelling_index(&self, name: &str) -> Option<usize> {
        self.label_index.get(name).copied()
    }

    pub fn labelling_at(&self, idx: usize) -> &Labelling {
        &self.labellings[idx]
    }

    pub fn label_value(&self, name: &str, tuple: &[NodeId]) -> Result<ExtInt, GraphError> {
        let lab = self
            .labelling(name)
            .ok_or_else(|| GraphError::UnknownLabelling(name.to_string()))?;
        if lab.arity != tuple.len() {
            return Err(GraphError::ArityMismatch {
                name: name.to_string(),
                expected: lab.arity,
                found: tuple.len(),
            });
        }
        Ok(lab.get(tuple))
    }

    /// Sum over positions `1..=s` (`s` the longest path) of the labelling
    /// applied to the sink-padded tuple at each position.
    pub fn aggregate(&self, name: &str, paths: &[Path]) -> Result<ExtInt, EvalError> {
        let lab = self
            .labelling(name)
            .ok_or_else(|| EvalError::UnknownLabelling(name.to_string()))?;
        if lab.arity != paths.len() {
            return Err(EvalError::ArityMismatch {
                name: name.to_string(),
                expected: lab.arity,
                found: paths.len(),
            });
        }
        let s = paths.iter().map(Path::len).max().unwrap_or(0);
        let mut tuple = Vec::with_capacity(paths.len());
        ExtInt::sum((1..=s).map(|i| {
            tuple.clear();
            tuple.extend(paths.iter().map(|p| p.at(i)));
            lab.get(&tuple)
        }))
    }

    /// Labellings whose finite values exceed `cap` in absolute value.
    pub fn weight_warnings(&self, cap: i64) -> Vec<String> {
        let mut out = Vec::new();
        for lab in &self.labellings {
            let worst = std::iter::once(lab.default)
                .chain(lab.entries.values().copied())
                .filter_map(ExtInt::finite)
                .map(|v| v.unsigned_abs())
                .max()
                .unwrap_or(0);
            if worst > cap.unsigned_abs() {
                out.push(format!(
                    "labelling `{}` has magnitude {worst} above cap {cap}",
                    lab.name
                ));
            }
        }
        out
    }

    pub fn path_names(&self, p: &[NodeId]) -> Vec<String> {
        p.iter().map(|&n| self.name(n).to_string()).collect()
    }
}

#[derive(Debug, Default)]
pub struct GraphBuilder {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    labellings: Vec<Labelling>,
    label_index: HashMap<String, usize>,
}

impl GraphBuilder {
    pub fn node(&mut self, name: &str) -> Result<NodeId, GraphError> {
        if name == SINK_NAME || self.index.contains_key(name) {
            return Err(GraphError::DuplicateNode(name.to_string()));
        }
        let id = NodeId(self.names.len() as u32 + 1);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn nodes<'a, I: IntoIterator<Item = &'a str>>(&mut self, names: I) -> Result<&mut Self, GraphError> {
        for n in names {
            self.node(n)?;
        }
        Ok(self)
    }

    pub fn id(&self, name: &str) -> Result<NodeId, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn labelling(&mut self, name: &str, arity: usize, default: ExtInt) -> Result<&mut Self, GraphError> {
        if arity == 0 {
            return Err(GraphError::ZeroArity(name.to_string()));
        }
        if self.label_index.contains_key(name) {
            return Err(GraphError::DuplicateLabelling(name.to_string()));
        }
        self.label_index.insert(name.to_string(), self.labellings.len());
        self.labellings.push(Labelling::new(name, arity, default));
        Ok(self)
    }

    pub fn set(&mut self, name: &str, tuple: &[&str], value: impl Into<ExtInt>) -> Result<&mut Self, GraphError> {
        let ids = tuple
            .iter()
            .map(|n| self.id(n))
            .collect::<Result<Vec<_>, _>>()?;
        self.set_ids(name, ids, value.into(), true)
    }

    /// Inserts an entry; with `strict`, a repeated tuple is an error.
    pub fn set_ids(&mut self, name: &str, tuple: Vec<NodeId>, value: ExtInt, strict: bool) -> Result<&mut Self, GraphError> {
        let idx = *self
            .label_index
            .get(name)
            .ok_or_else(|| GraphError::UnknownLabelling(name.to_string()))?;
        let lab = &mut self.labellings[idx];
        if tuple.len() != lab.arity {
            return Err(GraphError::ArityMismatch {
                name: name.to_string(),
                expected: lab.arity,
                found: tuple.len(),
            });
        }
        if strict && lab.entries.contains_key(&tuple) {
            let names = tuple.iter().map(|n| self.names[n.index() - 1].clone()).collect();
            return Err(GraphError::DuplicateEntry {
                name: name.to_string(),
                tuple: names,
            });
        }
        lab.entries.insert(tuple, value);
        Ok(self)
    }

    pub fn build(self) -> Graph {
        let mut names = Vec::with_capacity(self.names.len() + 1);
        names.push(SINK_NAME.to_string());
        names.extend(self.names);
        Graph {
            names,
            index: self.index,
            labellings: self.labellings,
            label_index: self.label_index,
        }
    }
}

/// A finite node sequence. Index `i > len` yields the sink.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Path(pub Vec<NodeId>);

impl Path {
    pub fn new(nodes: Vec<NodeId>) -> Self {
        Path(nodes)
    }

    pub fn empty() -> Self {
        Path(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based index with sink padding.
    pub fn at(&self, i: usize) -> NodeId {
        assert!(i >= 1, "path positions start at 1");
        self.0.get(i - 1).copied().unwrap_or(SINK)
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    pub fn first(&self) -> Option<NodeId> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<NodeId> {
        self.0.last().copied()
    }
}

impl From<Vec<NodeId>> for Path {
    fn from(v: Vec<NodeId>) -> Self {
        Path(v)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_sink() {
            f.write_str(SINK_NAME)
        } else {
            write!(f, "#{}", self.0)
        }
    }
}

/// Where a labelling lives: in the base graph or among ontology definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabelKey {
    Base(usize),
    Aux(usize),
}

/// Read access to labellings by name, implemented by plain graphs and by
/// ontology-extended views.
pub trait LabelSource {
    fn graph(&self) -> &Graph;

    /// Key and arity of a labelling visible in this view.
    fn resolve(&self, name: &str) -> Option<(LabelKey, usize)>;

    fn value(&self, key: LabelKey, tuple: &[NodeId]) -> Result<ExtInt, EvalError>;

    fn value_by_name(&self, name: &str, tuple: &[NodeId]) -> Result<ExtInt, EvalError> {
        let (key, arity) = self
            .resolve(name)
            .ok_or_else(|| EvalError::UnknownLabelling(name.to_string()))?;
        if arity != tuple.len() {
            return Err(EvalError::ArityMismatch {
                name: name.to_string(),
                expected: arity,
                found: tuple.len(),
            });
        }
        self.value(key, tuple)
    }

    fn aggregate(&self, name: &str, paths: &[Path]) -> Result<ExtInt, EvalError> {
        let s = paths.iter().map(Path::len).max().unwrap_or(0);
        let mut total = Vec::with_capacity(s);
        for i in 1..=s {
            let tuple: Vec<NodeId> = paths.iter().map(|p| p.at(i)).collect();
            total.push(self.value_by_name(name, &tuple)?);
        }
        if s == 0 {
            // still surface unknown labellings and arity errors on empty input
            let (_, arity) = self
                .resolve(name)
                .ok_or_else(|| EvalError::UnknownLabelling(name.to_string()))?;
            if arity != paths.len() {
                return Err(EvalError::ArityMismatch {
                    name: name.to_string(),
                    expected: arity,
                    found: paths.len(),
                });
            }
        }
        ExtInt::sum(total)
    }
}

impl LabelSource for Graph {
    fn graph(&self) -> &Graph {
        self
    }

    fn resolve(&self, name: &str) -> Option<(LabelKey, usize)> {
        self.labelling_index(name)
            .map(|i| (LabelKey::Base(i), self.labellings[i].arity))
    }

    fn value(&self, key: LabelKey, tuple: &[NodeId]) -> Result<ExtInt, EvalError> {
        match key {
            LabelKey::Base(i) => Ok(self.labellings[i].get(tuple)),
            LabelKey::Aux(_) => Err(EvalError::UnknownLabelling(format!("{key:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn p(g: &Graph, names: &[&str]) -> Path {
        Path(names.iter().map(|n| g.node(n).unwrap()).collect())
    }

    #[test]
    fn path_index_pads_with_sink() {
        let g = corpus::map_graph();
        let path = p(&g, &["S", "T", "P"]);
        assert_eq!(path.at(2), g.node("T").unwrap());
        assert_eq!(path.at(7), SINK);
        assert_eq!(Path::empty().at(1), SINK);
    }

    #[test]
    fn label_value_examples() {
        let g = corpus::map_graph();
        let pn = g.node("P").unwrap();
        assert_eq!(g.label_value("time", &[pn]).unwrap(), 60);
        assert_eq!(g.label_value("time", &[SINK]).unwrap(), 0);
        let (s, t) = (g.node("S").unwrap(), g.node("T").unwrap());
        assert_eq!(g.label_value("E", &[s, t]).unwrap(), 1);
        assert_eq!(g.label_value("E", &[t, s]).unwrap(), 0);
        assert!(matches!(
            g.label_value("speed", &[pn]),
            Err(GraphError::UnknownLabelling(_))
        ));
        assert!(matches!(
            g.label_value("E", &[pn]),
            Err(GraphError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn aggregate_examples() {
        let g = corpus::map_graph();
        assert_eq!(g.aggregate("time", &[p(&g, &["S", "T", "P"])]).unwrap(), 80);
        assert_eq!(g.aggregate("attr", &[Path::empty()]).unwrap(), 0);
        let long = p(&g, &["S", "T", "P", "B", "S", "T", "P"]);
        assert_eq!(g.aggregate("attr", &[long]).unwrap(), 148);
        assert!(matches!(
            g.aggregate("E", &[Path::empty()]),
            Err(EvalError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn binary_aggregate_pads_shorter_path() {
        let g = corpus::map_graph();
        // E(S,T) + E(T,sink) = 1 + 0
        let a = p(&g, &["S", "T"]);
        let b = p(&g, &["T"]);
        assert_eq!(g.aggregate("E", &[a, b]).unwrap(), 1);
    }

    #[test]
    fn builder_rejects_duplicates() {
        let mut b = Graph::builder();
        b.node("a").unwrap();
        assert!(b.node("a").is_err());
        b.labelling("x", 1, Fin(0)).unwrap();
        b.set("x", &["a"], 3).unwrap();
        assert!(matches!(b.set("x", &["a"], 4), Err(GraphError::DuplicateEntry { .. })));
        assert!(b.labelling("x", 1, Fin(0)).is_err());
        assert!(b.labelling("z", 0, Fin(0)).is_err());
    }

    #[test]
    fn weight_cap_warning() {
        let g = corpus::map_graph();
        assert!(g.weight_warnings(1000).is_empty());
        assert_eq!(g.weight_warnings(50).len(), 2);
    }
}
