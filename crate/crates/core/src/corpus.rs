//! Bundled example graph, example queries and their expected outcomes.
//!
//! The expected outcomes in `fixtures/goldens.json` were produced by the
//! oracle (paths of up to 8 nodes, short bound 4 for extrema) and checked by
//! hand against the map graph.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::engine::{self, reference};
use crate::error::Error;
use crate::graph::{ExtInt, Graph};
use crate::ontology::Nested;
use crate::oracle::OracleConfig;
use crate::query::OpraQuery;
use crate::solver::{Mode, SolveConfig};

pub const MAP_JSON: &str = include_str!("../fixtures/map.json");
pub const GOLDENS_JSON: &str = include_str!("../fixtures/goldens.json");

/// Oracle path-length bound used for the goldens.
pub const ORACLE_BOUND: usize = 8;
/// Short bound of the two-bound rule used for the goldens.
pub const ORACLE_SHORT_BOUND: usize = 4;

/// The map graph: squares, parks and the links between them.
pub fn map_graph() -> Graph {
    Graph::from_json_str(MAP_JSON).expect("bundled graph is well formed")
}

pub const QUERIES: &[(&str, &str)] = &[
    ("q_route", include_str!("../fixtures/queries/q_route.opra")),
    ("q_route_sp", include_str!("../fixtures/queries/q_route_sp.opra")),
    ("sums", include_str!("../fixtures/queries/sums.opra")),
    ("multiple_paths", include_str!("../fixtures/queries/multiple_paths.opra")),
    ("processed_labellings", include_str!("../fixtures/queries/processed_labellings.opra")),
    ("t_walk_via_w", include_str!("../fixtures/queries/t_walk_via_w.opra")),
    ("nested_queries", include_str!("../fixtures/queries/nested_queries.opra")),
    ("neighbourhood", include_str!("../fixtures/queries/neighbourhood.opra")),
    ("path_lengths", include_str!("../fixtures/queries/path_lengths.opra")),
    ("registers", include_str!("../fixtures/queries/registers.opra")),
];

pub fn query_text(name: &str) -> Option<&'static str> {
    QUERIES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    /// Is there an answer with these node bindings?
    Emptiness { nodes: &'static [(&'static str, &'static str)] },
    Extremum {
        label: &'static str,
        mode: Mode,
    },
    /// Value of an ontology labelling on named nodes.
    Labelling {
        name: &'static str,
        args: &'static [&'static str],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Case {
    pub name: &'static str,
    pub query: &'static str,
    pub kind: CaseKind,
}

const SP: &[(&str, &str)] = &[("s", "S"), ("t", "P")];

pub const CASES: &[Case] = &[
    Case {
        name: "route",
        query: "q_route",
        kind: CaseKind::Emptiness { nodes: SP },
    },
    Case {
        name: "route_min_time",
        query: "q_route_sp",
        kind: CaseKind::Extremum {
            label: "time",
            mode: Mode::Min,
        },
    },
    Case {
        name: "route_max_attr",
        query: "q_route_sp",
        kind: CaseKind::Extremum {
            label: "attr",
            mode: Mode::Max,
        },
    },
    Case {
        name: "sums",
        query: "sums",
        kind: CaseKind::Emptiness { nodes: SP },
    },
    Case {
        name: "multiple_paths",
        query: "multiple_paths",
        kind: CaseKind::Emptiness { nodes: &[] },
    },
    Case {
        name: "t_walk",
        query: "processed_labellings",
        kind: CaseKind::Emptiness { nodes: SP },
    },
    Case {
        name: "t_walk_via_w",
        query: "t_walk_via_w",
        kind: CaseKind::Emptiness { nodes: &[] },
    },
    Case {
        name: "crowded",
        query: "nested_queries",
        kind: CaseKind::Emptiness { nodes: &[] },
    },
    Case {
        name: "greedy",
        query: "neighbourhood",
        kind: CaseKind::Emptiness { nodes: SP },
    },
    Case {
        name: "mas_s_t",
        query: "neighbourhood",
        kind: CaseKind::Labelling {
            name: "MAS",
            args: &["S", "T"],
        },
    },
    Case {
        name: "mas_s_w",
        query: "neighbourhood",
        kind: CaseKind::Labelling {
            name: "MAS",
            args: &["S", "W"],
        },
    },
    Case {
        name: "lengths",
        query: "path_lengths",
        kind: CaseKind::Emptiness { nodes: &[] },
    },
    Case {
        name: "registers",
        query: "registers",
        kind: CaseKind::Emptiness { nodes: &[] },
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Nonempty(bool),
    Value(ExtInt),
}

impl Outcome {
    pub fn to_json(self) -> Value {
        match self {
            Outcome::Nonempty(b) => json!({ "nonempty": b }),
            Outcome::Value(v) => json!({ "value": v.to_json() }),
        }
    }

    pub fn from_json(v: &Value) -> Option<Outcome> {
        if let Some(b) = v.get("nonempty").and_then(Value::as_bool) {
            return Some(Outcome::Nonempty(b));
        }
        v.get("value").and_then(ExtInt::from_json).map(Outcome::Value)
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Nonempty(true) => f.write_str("nonempty"),
            Outcome::Nonempty(false) => f.write_str("empty"),
            Outcome::Value(v) => write!(f, "{v}"),
        }
    }
}

fn load(g: &Graph, case: &Case) -> Result<OpraQuery, Error> {
    let text = query_text(case.query).expect("case names a bundled query");
    engine::prepare(g, text)
}

/// Runs a case on the answer graph and solver.
pub fn run_engine(g: &Graph, case: &Case, cfg: &SolveConfig) -> Result<Outcome, Error> {
    let q = load(g, case)?;
    Ok(match case.kind {
        CaseKind::Emptiness { nodes } => {
            let b = engine::bindings(g, nodes, &[])?;
            Outcome::Nonempty(engine::check(g, &q, &b, cfg)?.nonempty)
        }
        CaseKind::Extremum { label, mode } => {
            let t = engine::parse_target(label, &q)?;
            let b = engine::bindings(g, &[], &[])?;
            Outcome::Value(engine::extremum(g, &q, &b, &t, mode, cfg)?.value)
        }
        CaseKind::Labelling { name, args } => {
            Outcome::Value(engine::labelling_value(g, &q, name, args, Nested::Solver(cfg.clone()))?)
        }
    })
}

/// Runs a case by enumeration; extrema use the two-bound rule with
/// [`ORACLE_SHORT_BOUND`] and `cfg.max_path_len`.
pub fn run_oracle(g: &Graph, case: &Case, cfg: &OracleConfig) -> Result<Outcome, Error> {
    let q = load(g, case)?;
    Ok(match case.kind {
        CaseKind::Emptiness { nodes } => {
            let b = engine::bindings(g, nodes, &[])?;
            Outcome::Nonempty(reference::nonempty(g, &q, &b, cfg)?)
        }
        CaseKind::Extremum { label, mode } => {
            let t = engine::parse_target(label, &q)?;
            let b = engine::bindings(g, &[], &[])?;
            Outcome::Value(reference::two_bound_extremum(g, &q, &b, &t, mode, ORACLE_SHORT_BOUND, cfg)?)
        }
        CaseKind::Labelling { name, args } => {
            Outcome::Value(engine::labelling_value(g, &q, name, args, Nested::Oracle(*cfg))?)
        }
    })
}

/// The committed expected outcomes, by case name.
pub fn goldens() -> BTreeMap<String, Outcome> {
    let v: Value = serde_json::from_str(GOLDENS_JSON).expect("bundled goldens are valid JSON");
    v.as_object()
        .expect("goldens are an object")
        .iter()
        .map(|(k, v)| (k.clone(), Outcome::from_json(v).expect("golden outcome")))
        .collect()
}

/// Goldens as JSON, in case order.
pub fn goldens_json(outcomes: &[(String, Outcome)]) -> Value {
    let map: serde_json::Map<String, Value> = outcomes.iter().map(|(k, o)| (k.clone(), o.to_json())).collect();
    Value::Object(map)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseReport {
    pub name: &'static str,
    pub expected: Option<Outcome>,
    pub got: Result<Outcome, String>,
}

impl CaseReport {
    pub fn ok(&self) -> bool {
        matches!((&self.got, self.expected), (Ok(g), Some(e)) if *g == e)
    }
}

/// Runs every case on the engine and compares with the goldens.
pub fn run_all(cfg: &SolveConfig) -> Vec<CaseReport> {
    let g = map_graph();
    let gold = goldens();
    CASES
        .iter()
        .map(|c| CaseReport {
            name: c.name,
            expected: gold.get(c.name).copied(),
            got: run_engine(&g, c, cfg).map_err(|e| e.to_string()),
        })
        .collect()
}
