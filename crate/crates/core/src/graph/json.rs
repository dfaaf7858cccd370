//! JSON form of graphs:
//! `{"nodes": [..], "labellings": {name: {"arity", "default", "entries": [[node.., value]]}}}`.

use serde_json::{json, Map, Value};

use super::{ExtInt, Graph, GraphBuilder, GraphError};

fn fmt_err(msg: impl Into<String>) -> GraphError {
    GraphError::Format(msg.into())
}

impl Graph {
    pub fn from_json_str(s: &str) -> Result<Graph, GraphError> {
        let v: Value = serde_json::from_str(s).map_err(|e| fmt_err(e.to_string()))?;
        Graph::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<Graph, GraphError> {
        let obj = v.as_object().ok_or_else(|| fmt_err("top level must be an object"))?;
        let nodes = obj
            .get("nodes")
            .and_then(Value::as_array)
            .ok_or_else(|| fmt_err("missing `nodes` array"))?;
        let mut b = GraphBuilder::default();
        for n in nodes {
            let name = n.as_str().ok_or_else(|| fmt_err("node names must be strings"))?;
            b.node(name)?;
        }
        let empty = Map::new();
        let labs = match obj.get("labellings") {
            None => &empty,
            Some(l) => l.as_object().ok_or_else(|| fmt_err("`labellings` must be an object"))?,
        };
        for (name, spec) in labs {
            let arity = spec
                .get("arity")
                .and_then(Value::as_u64)
                .ok_or_else(|| fmt_err(format!("labelling `{name}`: missing arity")))?
                as usize;
            let default = match spec.get("default") {
                None => ExtInt::ZERO,
                Some(d) => ExtInt::from_json(d)
                    .ok_or_else(|| fmt_err(format!("labelling `{name}`: bad default")))?,
            };
            b.labelling(name, arity, default)?;
            let entries = match spec.get("entries") {
                None => continue,
                Some(e) => e
                    .as_array()
                    .ok_or_else(|| fmt_err(format!("labelling `{name}`: `entries` must be an array")))?,
            };
            for entry in entries {
                let row = entry
                    .as_array()
                    .ok_or_else(|| fmt_err(format!("labelling `{name}`: entries must be arrays")))?;
                let (value, tuple) = row
                    .split_last()
                    .ok_or_else(|| fmt_err(format!("labelling `{name}`: empty entry")))?;
                let value = ExtInt::from_json(value)
                    .ok_or_else(|| fmt_err(format!("labelling `{name}`: bad value {value}")))?;
                let ids = tuple
                    .iter()
                    .map(|n| {
                        let s = n
                            .as_str()
                            .ok_or_else(|| fmt_err(format!("labelling `{name}`: node names must be strings")))?;
                        b.id(s)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                b.set_ids(name, ids, value, true)?;
            }
        }
        Ok(b.build())
    }

    /// Serializes with entries sorted, so output is deterministic.
    pub fn to_json(&self) -> Value {
        let nodes: Vec<&str> = self.nodes().map(|n| self.name(n)).collect();
        let mut labs = Map::new();
        for lab in self.labellings() {
            let mut rows: Vec<(Vec<&str>, ExtInt)> = lab
                .entries()
                .map(|(t, v)| (t.iter().map(|&n| self.name(n)).collect(), v))
                .collect();
            rows.sort();
            let entries: Vec<Value> = rows
                .into_iter()
                .map(|(t, v)| {
                    let mut row: Vec<Value> = t.into_iter().map(Value::from).collect();
                    row.push(v.to_json());
                    Value::Array(row)
                })
                .collect();
            labs.insert(
                lab.name().to_string(),
                json!({"arity": lab.arity(), "default": lab.default_value().to_json(), "entries": entries}),
            );
        }
        json!({"nodes": nodes, "labellings": labs})
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = crate::corpus::map_graph();
        let back = Graph::from_json(&g.to_json()).unwrap();
        assert_eq!(g.to_json(), back.to_json());
    }

    #[test]
    fn rejects_duplicate_entries_and_unknown_nodes() {
        let dup = r#"{"nodes":["a"],"labellings":{"x":{"arity":1,"entries":[["a",1],["a",2]]}}}"#;
        assert!(matches!(Graph::from_json_str(dup), Err(GraphError::DuplicateEntry { .. })));
        let unk = r#"{"nodes":["a"],"labellings":{"x":{"arity":1,"entries":[["b",1]]}}}"#;
        assert!(matches!(Graph::from_json_str(unk), Err(GraphError::UnknownNode(_))));
        let ar = r#"{"nodes":["a"],"labellings":{"x":{"arity":2,"entries":[["a",1]]}}}"#;
        assert!(matches!(Graph::from_json_str(ar), Err(GraphError::ArityMismatch { .. })));
    }

    #[test]
    fn infinite_values_load() {
        let s = r#"{"nodes":["a"],"labellings":{"x":{"arity":1,"default":"-inf","entries":[["a","+inf"]]}}}"#;
        let g = Graph::from_json_str(s).unwrap();
        let a = g.node("a").unwrap();
        assert_eq!(g.label_value("x", &[a]).unwrap(), ExtInt::PosInf);
    }
}
