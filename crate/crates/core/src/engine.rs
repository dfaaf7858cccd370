//! One-call entry points: parse and validate a query, then answer it with
//! the answer graph and solver or with the oracle.

use std::collections::BTreeSet;

use crate::answer_graph::{Answer, AnswerGraph, Bindings, Target};
use crate::error::{Error, EvalError};
use crate::graph::{ExtInt, Graph, Path};
use crate::ontology::{ExtendedGraph, Nested};
use crate::oracle::{self, OracleConfig};
use crate::query::{parse, validate, OpraQuery};
use crate::solver::{self, EmptinessResult, ExtremumResult, Mode, SolveConfig};

/// Parses and validates query text against a graph.
pub fn prepare(g: &Graph, text: &str) -> Result<OpraQuery, Error> {
    let q = parse(text)?;
    Ok(validate(&q, g)?)
}

/// Builds bindings from node and path names.
pub fn bindings(g: &Graph, nodes: &[(&str, &str)], paths: &[(&str, &[&str])]) -> Result<Bindings, EvalError> {
    let node = |n: &str| {
        g.node(n)
            .filter(|v| !v.is_sink())
            .ok_or_else(|| EvalError::Binding(format!("unknown node `{n}`")))
    };
    let mut b = Bindings::default();
    for (var, n) in nodes {
        b.nodes.insert(var.to_string(), node(n)?);
    }
    for (var, ns) in paths {
        let p = ns.iter().map(|n| node(n)).collect::<Result<Vec<_>, _>>()?;
        b.paths.insert(var.to_string(), Path::new(p));
    }
    Ok(b)
}

/// Reads `label` or `label[p, q]`; a bare label applies to the query's
/// first path variable.
pub fn parse_target(spec: &str, q: &OpraQuery) -> Result<Target, EvalError> {
    let spec = spec.trim();
    let (label, paths) = match spec.find('[') {
        Some(i) if spec.ends_with(']') => {
            let inner = &spec[i + 1..spec.len() - 1];
            let paths: Vec<String> = inner.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            (spec[..i].trim().to_string(), paths)
        }
        Some(_) => return Err(EvalError::Binding(format!("malformed target `{spec}`"))),
        None => {
            let first = q
                .query
                .path_vars()
                .into_iter()
                .next()
                .ok_or_else(|| EvalError::Binding("the query has no path variable to aggregate over".into()))?;
            (spec.to_string(), vec![first])
        }
    };
    if label.is_empty() || paths.is_empty() {
        return Err(EvalError::Binding(format!("malformed target `{spec}`")));
    }
    Ok(Target { label, paths })
}

fn extended<'g>(g: &'g Graph, q: &OpraQuery, nested: Nested) -> ExtendedGraph<'g> {
    ExtendedGraph::new(g, q.ontology.clone(), nested)
}

/// Emptiness of a validated query under the given bindings.
pub fn check(g: &Graph, q: &OpraQuery, b: &Bindings, cfg: &SolveConfig) -> Result<EmptinessResult, EvalError> {
    let eg = extended(g, q, Nested::Solver(cfg.clone()));
    let ag = AnswerGraph::build(&eg, &q.query, b, None)?;
    solver::check_empty(&ag, cfg)
}

pub fn extremum(
    g: &Graph,
    q: &OpraQuery,
    b: &Bindings,
    target: &Target,
    mode: Mode,
    cfg: &SolveConfig,
) -> Result<ExtremumResult, EvalError> {
    let eg = extended(g, q, Nested::Solver(cfg.clone()));
    let ag = AnswerGraph::build(&eg, &q.query, b, Some(target))?;
    solver::extremum(&ag, mode, cfg)
}

/// Answers with every path of at most `max_len` nodes, read off the answer
/// graph.
pub fn answers(
    g: &Graph,
    q: &OpraQuery,
    b: &Bindings,
    max_len: usize,
    cfg: &SolveConfig,
) -> Result<BTreeSet<Answer>, EvalError> {
    let eg = extended(g, q, Nested::Solver(cfg.clone()));
    let ag = AnswerGraph::build(&eg, &q.query, b, None)?;
    ag.answers_up_to(max_len)
}

/// Value of an ontology labelling on named nodes.
pub fn labelling_value(g: &Graph, q: &OpraQuery, name: &str, args: &[&str], nested: Nested) -> Result<ExtInt, EvalError> {
    use crate::graph::LabelSource;
    let eg = extended(g, q, nested);
    let tuple = args
        .iter()
        .map(|n| g.node(n).ok_or_else(|| EvalError::Binding(format!("unknown node `{n}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    eg.value_by_name(name, &tuple)
}

/// Oracle counterparts, with nested queries also answered by enumeration.
pub mod reference {
    use super::*;

    pub fn answers(g: &Graph, q: &OpraQuery, b: &Bindings, cfg: &OracleConfig) -> Result<BTreeSet<Answer>, EvalError> {
        let eg = extended(g, q, Nested::Oracle(*cfg));
        oracle::enumerate_answers(&eg, &q.query, b, cfg)
    }

    pub fn nonempty(g: &Graph, q: &OpraQuery, b: &Bindings, cfg: &OracleConfig) -> Result<bool, EvalError> {
        let eg = extended(g, q, Nested::Oracle(*cfg));
        oracle::nonempty(&eg, &q.query, b, cfg)
    }

    pub fn extremum(
        g: &Graph,
        q: &OpraQuery,
        b: &Bindings,
        target: &Target,
        mode: Mode,
        cfg: &OracleConfig,
    ) -> Result<ExtInt, EvalError> {
        let eg = extended(g, q, Nested::Oracle(*cfg));
        oracle::brute_extremum(&eg, &q.query, b, target, mode, cfg)
    }

    /// The two-bound rule with `b2 = cfg.max_path_len`.
    pub fn two_bound_extremum(
        g: &Graph,
        q: &OpraQuery,
        b: &Bindings,
        target: &Target,
        mode: Mode,
        b1: usize,
        cfg: &OracleConfig,
    ) -> Result<ExtInt, EvalError> {
        let eg = extended(g, q, Nested::Oracle(*cfg));
        oracle::two_bound_extremum(&eg, &q.query, b, target, mode, b1, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::map_graph;

    #[test]
    fn target_specs() {
        let g = map_graph();
        let q = prepare(&g, "MATCH PATHS (p, r) WHERE (<>*)(p, r)").unwrap();
        assert_eq!(parse_target("time", &q).unwrap().paths, ["p"]);
        assert_eq!(parse_target("E[p, r]", &q).unwrap().paths, ["p", "r"]);
        assert!(parse_target("time[", &q).is_err());
        assert!(parse_target("time[]", &q).is_err());
    }

    #[test]
    fn bindings_by_name() {
        let g = map_graph();
        let b = bindings(&g, &[("s", "S")], &[("p", &["S", "T"])]).unwrap();
        assert_eq!(b.paths["p"].len(), 2);
        assert!(bindings(&g, &[("s", "Q")], &[]).is_err());
    }
}
