//! Reference semantics by exhaustive enumeration.
//!
//! Path tuples are enumerated position by position up to a length bound.
//! A prefix is abandoned as soon as some regular constraint has no run left
//! on it. Every complete tuple is then checked directly: endpoints, full
//! automaton acceptance and aggregated sums. Nothing here goes through the
//! answer graph or the solver.

use std::collections::BTreeSet;

use crate::answer_graph::{Answer, Bindings, Target};
use crate::automata::{compile, Nfa};
use crate::error::EvalError;
use crate::graph::{ExtInt, LabelSource, NodeId, Path, SINK};
use crate::query::{is_node_const, node_const_name, PraQuery};
use crate::solver::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Longest path enumerated, in nodes.
    pub max_path_len: usize,
    /// Cap on path-tuple prefixes examined, complete tuples included.
    pub max_paths: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_path_len: 8,
            max_paths: 5_000_000,
        }
    }
}

/// One satisfying assignment: every node variable and every path variable
/// of the query, in `node_vars` and `path_vars` order.
struct Solution<'a> {
    nodes: &'a [NodeId],
    paths: &'a [Path],
}

struct Enumerator<'a> {
    src: &'a dyn LabelSource,
    q: &'a PraQuery,
    path_vars: Vec<String>,
    node_vars: Vec<String>,
    nfas: Vec<(Nfa, Vec<usize>)>,
    bound: Vec<Option<Path>>,
    node_choices: Vec<Vec<NodeId>>,
    max_len: usize,
    cap: usize,
    seen: usize,
}

impl<'a> Enumerator<'a> {
    fn new(src: &'a dyn LabelSource, q: &'a PraQuery, bind: &Bindings, cfg: &OracleConfig) -> Result<Self, EvalError> {
        let path_vars = q.path_vars();
        let node_vars = q.node_vars();
        let idx = |p: &str| {
            path_vars
                .iter()
                .position(|x| x == p)
                .ok_or_else(|| EvalError::Binding(format!("path `{p}` does not occur in the query")))
        };
        let mut bound = vec![None; path_vars.len()];
        for (name, p) in &bind.paths {
            bound[idx(name)?] = Some(p.clone());
        }
        let all: Vec<NodeId> = src.graph().nodes().collect();
        let mut node_choices = vec![all; node_vars.len()];
        for (name, &v) in &bind.nodes {
            let i = node_vars
                .iter()
                .position(|x| x == name)
                .ok_or_else(|| EvalError::Binding(format!("node `{name}` does not occur in the query")))?;
            node_choices[i] = vec![v];
        }
        let nfas = q
            .regular
            .iter()
            .map(|rc| Ok((compile(&rc.regex, rc.paths.len()), rc.paths.iter().map(|p| idx(p)).collect::<Result<Vec<_>, _>>()?)))
            .collect::<Result<Vec<_>, EvalError>>()?;
        Ok(Enumerator {
            src,
            q,
            path_vars,
            node_vars,
            nfas,
            bound,
            node_choices,
            max_len: cfg.max_path_len,
            cap: cfg.max_paths,
            seen: 0,
        })
    }

    fn local(paths: &[Path], comps: &[usize]) -> Vec<Path> {
        comps.iter().map(|&c| paths[c].clone()).collect()
    }

    /// Advances every automaton over position `i` of the tuple; `None` once
    /// some automaton has no run left.
    fn advance(&self, runs: &[BTreeSet<usize>], paths: &[Path], i: usize) -> Result<Option<Vec<BTreeSet<usize>>>, EvalError> {
        let mut out = Vec::with_capacity(runs.len());
        for ((nfa, comps), states) in self.nfas.iter().zip(runs) {
            let cur: Vec<NodeId> = comps.iter().map(|&c| paths[c].at(i)).collect();
            let next: Vec<NodeId> = comps.iter().map(|&c| paths[c].at(i + 1)).collect();
            let s = nfa.step(self.src, states, &cur, &next)?;
            if s.is_empty() {
                return Ok(None);
            }
            out.push(s);
        }
        Ok(Some(out))
    }

    /// Whether every automaton reading only path `c` still has a run after
    /// the letter from `last` to `next`.
    fn single_alive(&self, runs: &[BTreeSet<usize>], c: usize, last: NodeId, next: NodeId) -> Result<bool, EvalError> {
        for ((nfa, comps), states) in self.nfas.iter().zip(runs) {
            if comps[..] == [c] && nfa.step(self.src, states, &[last], &[next])?.is_empty() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn endpoint_node(&self, x: &str, nodes: &[NodeId]) -> Option<NodeId> {
        if is_node_const(x) {
            self.src.graph().node(node_const_name(x))
        } else {
            self.node_vars.iter().position(|v| v == x).map(|i| nodes[i])
        }
    }

    fn satisfies_paths(&self, paths: &[Path]) -> Result<bool, EvalError> {
        for (nfa, comps) in &self.nfas {
            if !nfa.match_paths(self.src, &Self::local(paths, comps))? {
                return Ok(false);
            }
        }
        for ac in &self.q.arith {
            let mut parts = Vec::with_capacity(ac.terms.len());
            for t in &ac.terms {
                let tuple: Vec<Path> = t
                    .paths
                    .iter()
                    .map(|p| paths[self.path_vars.iter().position(|x| x == p).expect("path var")].clone())
                    .collect();
                parts.push(self.src.aggregate(&t.label, &tuple)?.scale(t.coef)?);
            }
            if ExtInt::sum(parts)? > ExtInt::Fin(ac.bound) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn satisfies_nodes(&self, paths: &[Path], nodes: &[NodeId]) -> bool {
        self.q.path_constraints.iter().all(|pc| {
            let p = &paths[self.path_vars.iter().position(|x| *x == pc.path).expect("path var")];
            match (p.first(), p.last()) {
                (Some(a), Some(b)) => {
                    Some(a) == self.endpoint_node(&pc.source, nodes) && Some(b) == self.endpoint_node(&pc.target, nodes)
                }
                _ => false,
            }
        })
    }

    /// Calls `f` on every satisfying assignment; `f` returns `false` to stop.
    fn run(&mut self, f: &mut dyn FnMut(Solution<'_>) -> Result<bool, EvalError>) -> Result<(), EvalError> {
        let k = self.path_vars.len();
        let mut paths = vec![Path::empty(); k];
        let mut ended = vec![false; k];
        let runs: Vec<BTreeSet<usize>> = self.nfas.iter().map(|(n, _)| n.initial_states()).collect();
        self.extend(1, &mut paths, &mut ended, &runs, f).map(|_| ())
    }

    fn extend(
        &mut self,
        pos: usize,
        paths: &mut Vec<Path>,
        ended: &mut Vec<bool>,
        runs: &[BTreeSet<usize>],
        f: &mut dyn FnMut(Solution<'_>) -> Result<bool, EvalError>,
    ) -> Result<bool, EvalError> {
        self.seen += 1;
        if self.seen > self.cap {
            return Err(EvalError::EnumerationCapExceeded { cap: self.cap });
        }
        // `runs` has read positions up to pos - 3; position pos - 2 is the
        // last one whose next nodes are all known
        let stepped;
        let runs = if pos >= 3 {
            match self.advance(runs, paths, pos - 2)? {
                Some(r) => {
                    stepped = r;
                    &stepped[..]
                }
                None => return Ok(true),
            }
        } else {
            runs
        };
        if ended.iter().all(|&e| e) {
            return self.leaf(paths, f);
        }
        let k = paths.len();
        let mut options: Vec<Vec<Option<NodeId>>> = Vec::with_capacity(k);
        for c in 0..k {
            options.push(if ended[c] {
                vec![None]
            } else if let Some(b) = &self.bound[c] {
                vec![(pos <= b.len()).then(|| b.at(pos))]
            } else if pos > self.max_len {
                vec![None]
            } else {
                let mut opts = Vec::new();
                for o in std::iter::once(None).chain(self.src.graph().nodes().map(Some)) {
                    if pos < 2 || self.single_alive(runs, c, paths[c].at(pos - 1), o.unwrap_or(SINK))? {
                        opts.push(o);
                    }
                }
                opts
            });
        }
        for choice in crate::answer_graph::cartesian(&options) {
            // nothing may start after every path has ended at this position
            let mut pushed = Vec::new();
            let mut newly_ended = Vec::new();
            for (c, ch) in choice.iter().enumerate() {
                if ended[c] {
                    continue;
                }
                match ch {
                    Some(v) => {
                        paths[c].0.push(*v);
                        pushed.push(c);
                    }
                    None => {
                        ended[c] = true;
                        newly_ended.push(c);
                    }
                }
            }
            let go_on = self.extend(pos + 1, paths, ended, runs, f)?;
            for c in pushed {
                paths[c].0.pop();
            }
            for c in newly_ended {
                ended[c] = false;
            }
            if !go_on {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn leaf(&mut self, paths: &[Path], f: &mut dyn FnMut(Solution<'_>) -> Result<bool, EvalError>) -> Result<bool, EvalError> {
        if !self.satisfies_paths(paths)? {
            return Ok(true);
        }
        for nodes in crate::answer_graph::cartesian(&self.node_choices) {
            if self.satisfies_nodes(paths, &nodes) && !f(Solution { nodes: &nodes, paths })? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn answer_of(q: &PraQuery, en_nodes: &[String], en_paths: &[String], s: &Solution<'_>) -> Answer {
    let mut a = Answer::default();
    for x in &q.match_nodes {
        let i = en_nodes.iter().position(|v| v == x).expect("node var");
        a.nodes.insert(x.clone(), s.nodes[i]);
    }
    for p in &q.match_paths {
        let i = en_paths.iter().position(|v| v == p).expect("path var");
        a.paths.insert(p.clone(), s.paths[i].clone());
    }
    a
}

/// All answers whose paths (free and existential) have at most
/// `max_path_len` nodes.
pub fn enumerate_answers(
    src: &dyn LabelSource,
    q: &PraQuery,
    bind: &Bindings,
    cfg: &OracleConfig,
) -> Result<BTreeSet<Answer>, EvalError> {
    let mut en = Enumerator::new(src, q, bind, cfg)?;
    let (nv, pv) = (en.node_vars.clone(), en.path_vars.clone());
    let mut out = BTreeSet::new();
    en.run(&mut |s| {
        out.insert(answer_of(q, &nv, &pv, &s));
        Ok(true)
    })?;
    Ok(out)
}

/// Whether some answer exists within the length bound.
pub fn nonempty(src: &dyn LabelSource, q: &PraQuery, bind: &Bindings, cfg: &OracleConfig) -> Result<bool, EvalError> {
    let mut en = Enumerator::new(src, q, bind, cfg)?;
    let mut found = false;
    en.run(&mut |_| {
        found = true;
        Ok(false)
    })?;
    Ok(found)
}

fn target_value(src: &dyn LabelSource, pv: &[String], target: &Target, paths: &[Path]) -> Result<ExtInt, EvalError> {
    let tuple: Vec<Path> = target
        .paths
        .iter()
        .map(|p| {
            pv.iter()
                .position(|x| x == p)
                .map(|i| paths[i].clone())
                .ok_or_else(|| EvalError::Binding(format!("path `{p}` does not occur in the query")))
        })
        .collect::<Result<_, _>>()?;
    src.aggregate(&target.label, &tuple)
}

/// Minimum or maximum of the target over all satisfying tuples within the
/// length bound; the empty set gives `+inf` for the minimum and `-inf` for
/// the maximum.
pub fn brute_extremum(
    src: &dyn LabelSource,
    q: &PraQuery,
    bind: &Bindings,
    target: &Target,
    mode: Mode,
    cfg: &OracleConfig,
) -> Result<ExtInt, EvalError> {
    let (short, _) = bounded_extrema(src, q, bind, target, mode, cfg.max_path_len, cfg)?;
    Ok(short)
}

/// The two-bound rule: the best value over tuples of length at most `b1`,
/// or the infinite value if a tuple of length in `(b1, b2]` is strictly
/// better than it.
pub fn two_bound_extremum(
    src: &dyn LabelSource,
    q: &PraQuery,
    bind: &Bindings,
    target: &Target,
    mode: Mode,
    b1: usize,
    cfg: &OracleConfig,
) -> Result<ExtInt, EvalError> {
    let (short, long) = bounded_extrema(src, q, bind, target, mode, b1, cfg)?;
    let better = match mode {
        Mode::Min => long < short,
        Mode::Max => long > short,
    };
    Ok(if better {
        match mode {
            Mode::Min => ExtInt::NegInf,
            Mode::Max => ExtInt::PosInf,
        }
    } else {
        short
    })
}

/// Best values over tuples of length `<= b1` and of length in
/// `(b1, cfg.max_path_len]`.
fn bounded_extrema(
    src: &dyn LabelSource,
    q: &PraQuery,
    bind: &Bindings,
    target: &Target,
    mode: Mode,
    b1: usize,
    cfg: &OracleConfig,
) -> Result<(ExtInt, ExtInt), EvalError> {
    let worst = match mode {
        Mode::Min => ExtInt::PosInf,
        Mode::Max => ExtInt::NegInf,
    };
    let pick = |a: ExtInt, b: ExtInt| match mode {
        Mode::Min => a.min(b),
        Mode::Max => a.max(b),
    };
    let mut en = Enumerator::new(src, q, bind, cfg)?;
    let pv = en.path_vars.clone();
    let (mut short, mut long) = (worst, worst);
    en.run(&mut |s| {
        let v = target_value(src, &pv, target, s.paths)?;
        let len = s.paths.iter().map(Path::len).max().unwrap_or(0);
        if len <= b1 {
            short = pick(short, v);
        } else {
            long = pick(long, v);
        }
        Ok(true)
    })?;
    Ok((short, long))
}

/// The sink-free node sequence of a path, for readable assertions.
pub fn node_names(src: &dyn LabelSource, p: &Path) -> Vec<String> {
    p.nodes()
        .iter()
        .filter(|n| **n != SINK)
        .map(|n| src.graph().name(*n).to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::map_graph;
    use crate::query::parse;

    fn route() -> PraQuery {
        parse("MATCH NODES (s, t), PATHS (p) SUCH THAT s -p-> t WHERE (<E(@1, @1') = 1>* <>)(p)")
            .unwrap()
            .query
    }

    fn sp(g: &crate::graph::Graph) -> Bindings {
        Bindings {
            nodes: [("s".to_string(), g.node("S").unwrap()), ("t".to_string(), g.node("P").unwrap())].into(),
            ..Default::default()
        }
    }

    #[test]
    fn route_contains_stp() {
        let g = map_graph();
        let cfg = OracleConfig {
            max_path_len: 3,
            ..Default::default()
        };
        let ans = enumerate_answers(&g, &route(), &sp(&g), &cfg).unwrap();
        assert!(ans.iter().any(|a| node_names(&g, &a.paths["p"]) == ["S", "T", "P"]));
        assert_eq!(ans.len(), 2);
    }

    #[test]
    fn unsatisfiable_is_empty() {
        let g = map_graph();
        let q = parse("MATCH PATHS (p) WHERE <1 = 0>(p)").unwrap().query;
        assert!(enumerate_answers(&g, &q, &Bindings::default(), &OracleConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unconstrained_node_is_every_node() {
        let g = map_graph();
        let q = parse("MATCH NODES (x)").unwrap().query;
        let ans = enumerate_answers(&g, &q, &Bindings::default(), &OracleConfig::default()).unwrap();
        assert_eq!(ans.len(), 5);
    }

    #[test]
    fn fig2_extrema_at_bound_8() {
        let g = map_graph();
        let time = Target {
            label: "time".into(),
            paths: vec!["p".into()],
        };
        let attr = Target {
            label: "attr".into(),
            paths: vec!["p".into()],
        };
        let cfg = OracleConfig::default();
        assert_eq!(brute_extremum(&g, &route(), &sp(&g), &time, Mode::Min, &cfg).unwrap(), 80);
        assert_eq!(brute_extremum(&g, &route(), &sp(&g), &attr, Mode::Max, &cfg).unwrap(), 148);
        assert_eq!(
            two_bound_extremum(&g, &route(), &sp(&g), &attr, Mode::Max, 4, &OracleConfig { max_path_len: 8, ..cfg }).unwrap(),
            ExtInt::PosInf
        );
    }

    #[test]
    fn empty_min_is_pos_inf() {
        let g = map_graph();
        let q = parse("MATCH PATHS (p) WHERE <1 = 0>(p)").unwrap().query;
        let t = Target {
            label: "time".into(),
            paths: vec!["p".into()],
        };
        let v = brute_extremum(&g, &q, &Bindings::default(), &t, Mode::Min, &OracleConfig::default()).unwrap();
        assert_eq!(v, ExtInt::PosInf);
    }

    #[test]
    fn cap_is_enforced() {
        let g = map_graph();
        let q = parse("MATCH PATHS (p)").unwrap().query;
        let cfg = OracleConfig {
            max_path_len: 4,
            max_paths: 10,
        };
        assert_eq!(
            enumerate_answers(&g, &q, &Bindings::default(), &cfg),
            Err(EvalError::EnumerationCapExceeded { cap: 10 })
        );
    }
}
