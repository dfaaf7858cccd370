//! The answer graph of a PRA query: an implicit product of the regular
//! constraints' automata, a position counter over the bound input paths and
//! one graph node per path variable.
//!
//! States are produced on demand. A path from a start state to a target
//! state spells a tuple of paths positionwise, with ended paths carrying the
//! sink, and every such tuple satisfies the path and regular constraints.
//! Summing [`AnswerGraph::weight`] over all states of that path gives the
//! left-hand sides of the arithmetical constraints.
//!
//! ```
//! use opra::answer_graph::{AnswerGraph, Bindings};
//! use opra::corpus::map_graph;
//! use opra::query::parse;
//!
//! let g = map_graph();
//! let q = parse("MATCH PATHS (p) WHERE (<E(@1, @1') = 1>* <>)(p)").unwrap();
//! let ag = AnswerGraph::build(&g, &q.query, &Bindings::default(), None).unwrap();
//! let starts = ag.start_states().unwrap();
//! assert!(starts.iter().any(|s| !ag.is_target(s)));
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::automata::{compile, Letter, Nfa};
use crate::error::EvalError;
use crate::graph::{ExtInt, LabelKey, LabelSource, NodeId, Path, SINK};
use crate::query::{is_node_const, node_const_name, PraQuery};

/// Externally fixed node and path variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings {
    pub nodes: BTreeMap<String, NodeId>,
    pub paths: BTreeMap<String, Path>,
}

/// A labelling aggregated along some path variables, to be minimized or
/// maximized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    pub label: String,
    pub paths: Vec<String>,
}

/// Input position: `At(j)` for `1 <= j <= N`, or past every bound path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pos {
    At(u32),
    Inf,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgState {
    /// One automaton state per regular constraint.
    pub nfa: Vec<u32>,
    pub pos: Pos,
    /// One node per path variable; the sink once that path has ended.
    pub nodes: Vec<NodeId>,
    /// Node variables fixed so far by path endpoints or bindings.
    pub assign: Vec<Option<NodeId>>,
}

/// Free variables of one answer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Answer {
    pub nodes: BTreeMap<String, NodeId>,
    pub paths: BTreeMap<String, Path>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Endpoint {
    Var(usize),
    Node(NodeId),
}

#[derive(Debug, Clone)]
struct WeightTerm {
    coef: i64,
    key: LabelKey,
    comps: Vec<usize>,
}

pub struct AnswerGraph<'a> {
    src: &'a dyn LabelSource,
    path_vars: Vec<String>,
    node_vars: Vec<String>,
    free_nodes: usize,
    free_paths: usize,
    bound: Vec<Option<Path>>,
    n: usize,
    sources: Vec<Vec<Endpoint>>,
    targets: Vec<Vec<Endpoint>>,
    nfas: Vec<Nfa>,
    local: Vec<Vec<usize>>,
    weights: Vec<Vec<WeightTerm>>,
    bounds: Vec<i64>,
    target: Option<Vec<WeightTerm>>,
    init_assign: Vec<Option<NodeId>>,
    all_nodes: Vec<NodeId>,
}

fn resolve_terms(
    src: &dyn LabelSource,
    comp: &dyn Fn(&str) -> Result<usize, EvalError>,
    items: &[(i64, &str, &[String])],
) -> Result<Vec<WeightTerm>, EvalError> {
    items
        .iter()
        .map(|&(coef, label, paths)| {
            let (key, arity) = src
                .resolve(label)
                .ok_or_else(|| EvalError::UnknownLabelling(label.to_string()))?;
            if arity != paths.len() {
                return Err(EvalError::ArityMismatch {
                    name: label.to_string(),
                    expected: arity,
                    found: paths.len(),
                });
            }
            let comps = paths.iter().map(|p| comp(p)).collect::<Result<_, _>>()?;
            Ok(WeightTerm { coef, key, comps })
        })
        .collect()
}

impl<'a> AnswerGraph<'a> {
    pub fn build(
        src: &'a dyn LabelSource,
        q: &PraQuery,
        bindings: &Bindings,
        target: Option<&Target>,
    ) -> Result<Self, EvalError> {
        let g = src.graph();
        let path_vars = q.path_vars();
        let node_vars = q.node_vars();
        let comp = |name: &str| {
            path_vars
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| EvalError::Binding(format!("path `{name}` does not occur in the query")))
        };
        let k = path_vars.len();

        let mut bound = vec![None; k];
        for (name, p) in &bindings.paths {
            if p.nodes().iter().any(|n| n.is_sink() || n.index() > g.node_count()) {
                return Err(EvalError::Binding(format!("path `{name}` uses an unknown node")));
            }
            bound[comp(name)?] = Some(p.clone());
        }
        let n = bound.iter().flatten().map(Path::len).max().unwrap_or(0);

        let mut init_assign = vec![None; node_vars.len()];
        for (name, &v) in &bindings.nodes {
            let i = node_vars
                .iter()
                .position(|x| x == name)
                .ok_or_else(|| EvalError::Binding(format!("node `{name}` does not occur in the query")))?;
            if v.is_sink() || v.index() > g.node_count() {
                return Err(EvalError::Binding(format!("node `{name}` bound to an unknown node")));
            }
            init_assign[i] = Some(v);
        }

        let endpoint = |x: &str| -> Result<Endpoint, EvalError> {
            if is_node_const(x) {
                let name = node_const_name(x);
                g.node(name)
                    .filter(|n| !n.is_sink())
                    .map(Endpoint::Node)
                    .ok_or_else(|| EvalError::Binding(format!("unknown node `{name}`")))
            } else {
                Ok(Endpoint::Var(node_vars.iter().position(|v| v == x).expect("node var")))
            }
        };
        let mut sources = vec![Vec::new(); k];
        let mut targets = vec![Vec::new(); k];
        for pc in &q.path_constraints {
            let c = comp(&pc.path)?;
            sources[c].push(endpoint(&pc.source)?);
            targets[c].push(endpoint(&pc.target)?);
        }

        let mut nfas = Vec::new();
        let mut local = Vec::new();
        for rc in &q.regular {
            nfas.push(compile(&rc.regex, rc.paths.len()));
            local.push(rc.paths.iter().map(|p| comp(p)).collect::<Result<Vec<_>, _>>()?);
        }

        let mut weights = Vec::new();
        let mut bounds = Vec::new();
        for ac in &q.arith {
            let items: Vec<(i64, &str, &[String])> =
                ac.terms.iter().map(|t| (t.coef, t.label.as_str(), t.paths.as_slice())).collect();
            weights.push(resolve_terms(src, &comp, &items)?);
            bounds.push(ac.bound);
        }
        let target = match target {
            Some(t) => Some(resolve_terms(src, &comp, &[(1, t.label.as_str(), t.paths.as_slice())])?),
            None => None,
        };

        let all_nodes = std::iter::once(SINK).chain(g.nodes()).collect();
        Ok(AnswerGraph {
            src,
            free_nodes: q.match_nodes.len(),
            free_paths: q.match_paths.len(),
            path_vars,
            node_vars,
            bound,
            n,
            sources,
            targets,
            nfas,
            local,
            weights,
            bounds,
            target,
            init_assign,
            all_nodes,
        })
    }

    pub fn source(&self) -> &dyn LabelSource {
        self.src
    }

    pub fn path_vars(&self) -> &[String] {
        &self.path_vars
    }

    /// Number of arithmetical constraints.
    pub fn dims(&self) -> usize {
        self.weights.len()
    }

    /// Right-hand sides of the arithmetical constraints, `sum <= bound`.
    pub fn bounds(&self) -> &[i64] {
        &self.bounds
    }

    pub fn has_target(&self) -> bool {
        self.target.is_some()
    }

    /// Maximum length of the bound input paths.
    pub fn input_len(&self) -> usize {
        self.n
    }

    pub fn nfas(&self) -> &[Nfa] {
        &self.nfas
    }

    fn bound_at(&self, c: usize, pos: Pos) -> NodeId {
        match (pos, &self.bound[c]) {
            (Pos::At(j), Some(p)) => p.at(j as usize),
            _ => SINK,
        }
    }

    fn check_endpoints(&self, eps: &[Endpoint], node: NodeId, assign: &mut [Option<NodeId>]) -> bool {
        for ep in eps {
            match *ep {
                Endpoint::Node(v) if v != node => return false,
                Endpoint::Node(_) => {}
                Endpoint::Var(i) => match assign[i] {
                    Some(v) if v != node => return false,
                    Some(_) => {}
                    None => assign[i] = Some(node),
                },
            }
        }
        true
    }

    /// The set S.
    pub fn start_states(&self) -> Result<Vec<AgState>, EvalError> {
        let pos = if self.n >= 1 { Pos::At(1) } else { Pos::Inf };
        let k = self.path_vars.len();
        let cands: Vec<Vec<NodeId>> = (0..k)
            .map(|c| {
                if self.bound[c].is_some() {
                    vec![self.bound_at(c, pos)]
                } else if !self.sources[c].is_empty() {
                    self.all_nodes[1..].to_vec()
                } else {
                    self.all_nodes.clone()
                }
            })
            .collect();
        let mut out = Vec::new();
        for nodes in cartesian(&cands) {
            let mut assign = self.init_assign.clone();
            let ok = (0..k).all(|c| {
                self.sources[c].is_empty()
                    || (!nodes[c].is_sink() && self.check_endpoints(&self.sources[c], nodes[c], &mut assign))
            });
            if !ok {
                continue;
            }
            let inits: Vec<Vec<u32>> = self
                .nfas
                .iter()
                .map(|a| a.initial.iter().map(|&q| q as u32).collect())
                .collect();
            for nfa in cartesian(&inits) {
                out.push(AgState {
                    nfa,
                    pos,
                    nodes: nodes.clone(),
                    assign: assign.clone(),
                });
            }
        }
        Ok(out)
    }

    /// Membership in T: every automaton final, input exhausted, every path
    /// ended.
    pub fn is_target(&self, st: &AgState) -> bool {
        st.pos == Pos::Inf
            && st.nodes.iter().all(|n| n.is_sink())
            && st.nfa.iter().zip(&self.nfas).all(|(&q, a)| a.finals[q as usize])
    }

    /// States reachable in one step. Ended paths stay ended, paths that end
    /// now must meet their endpoint targets, and each automaton reads the
    /// letter of the current position: only its BOTTOM loop once all of its
    /// paths have ended, only node-constraint letters before.
    pub fn successors(&self, st: &AgState) -> Result<Vec<AgState>, EvalError> {
        let pos = match st.pos {
            Pos::At(j) if (j as usize) < self.n => Pos::At(j + 1),
            _ => Pos::Inf,
        };
        let k = self.path_vars.len();
        let cands: Vec<Vec<NodeId>> = (0..k)
            .map(|c| {
                if st.nodes[c].is_sink() {
                    vec![SINK]
                } else if self.bound[c].is_some() {
                    vec![self.bound_at(c, pos)]
                } else {
                    self.all_nodes.clone()
                }
            })
            .collect();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for next in cartesian(&cands) {
            let mut assign = st.assign.clone();
            let ends_ok = (0..k).all(|c| {
                !(next[c].is_sink() && !st.nodes[c].is_sink())
                    || self.check_endpoints(&self.targets[c], st.nodes[c], &mut assign)
            });
            if !ends_ok {
                continue;
            }
            let mut moves: Vec<Vec<u32>> = Vec::with_capacity(self.nfas.len());
            for (i, a) in self.nfas.iter().enumerate() {
                let cur: Vec<NodeId> = self.local[i].iter().map(|&c| st.nodes[c]).collect();
                let nxt: Vec<NodeId> = self.local[i].iter().map(|&c| next[c]).collect();
                let ended = cur.iter().all(|n| n.is_sink());
                let next_ended = nxt.iter().all(|n| n.is_sink());
                let mut targets = BTreeSet::new();
                for &(l, r) in &a.trans[st.nfa[i] as usize] {
                    if (a.letters[l] == Letter::Bottom) != ended || !self.can_continue(i, r, next_ended) {
                        continue;
                    }
                    if a.eval_letter(self.src, l, &cur, &nxt)? {
                        targets.insert(r as u32);
                    }
                }
                if targets.is_empty() {
                    break;
                }
                moves.push(targets.into_iter().collect());
            }
            if moves.len() < self.nfas.len() {
                continue;
            }
            for nfa in cartesian(&moves) {
                let s = AgState {
                    nfa,
                    pos,
                    nodes: next.clone(),
                    assign: assign.clone(),
                };
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            }
        }
        Ok(out)
    }

    /// Whether automaton `i` in state `q` can still read the next position:
    /// once its paths have ended it needs a final state, before that some
    /// node-constraint letter.
    fn can_continue(&self, i: usize, q: usize, ended: bool) -> bool {
        let a = &self.nfas[i];
        if ended {
            a.finals[q]
        } else {
            a.trans[q].iter().any(|&(l, _)| a.letters[l] != Letter::Bottom)
        }
    }

    fn eval_terms(&self, terms: &[WeightTerm], st: &AgState) -> Result<ExtInt, EvalError> {
        let mut vals = Vec::with_capacity(terms.len());
        for t in terms {
            let tuple: Vec<NodeId> = t.comps.iter().map(|&c| st.nodes[c]).collect();
            if tuple.iter().all(|n| n.is_sink()) {
                continue;
            }
            vals.push(self.src.value(t.key, &tuple)?.scale(t.coef)?);
        }
        ExtInt::sum(vals)
    }

    /// Left-hand side of every arithmetical constraint at this position.
    pub fn weight(&self, st: &AgState) -> Result<Vec<ExtInt>, EvalError> {
        self.weights.iter().map(|w| self.eval_terms(w, st)).collect()
    }

    /// The target labelling at this position, 0 when no target was given.
    pub fn extremum_weight(&self, st: &AgState) -> Result<ExtInt, EvalError> {
        match &self.target {
            Some(t) => self.eval_terms(t, st),
            None => Ok(ExtInt::ZERO),
        }
    }

    /// Every path variable's path, truncated at its first sink.
    pub fn decode_paths(&self, states: &[AgState]) -> Vec<Path> {
        (0..self.path_vars.len())
            .map(|c| {
                Path::new(
                    states
                        .iter()
                        .map(|s| s.nodes[c])
                        .take_while(|n| !n.is_sink())
                        .collect(),
                )
            })
            .collect()
    }

    /// The answers spelled by a start-to-target state sequence. Free node
    /// variables left unconstrained range over every node.
    pub fn decode(&self, states: &[AgState]) -> Vec<Answer> {
        let paths = self.decode_paths(states);
        let last = states.last().map(|s| s.assign.clone()).unwrap_or_else(|| self.init_assign.clone());
        let mut base = Answer::default();
        for (name, p) in self.path_vars.iter().zip(paths).take(self.free_paths) {
            base.paths.insert(name.clone(), p);
        }
        let mut out = vec![base];
        for (name, fixed) in self.node_vars.iter().zip(last).take(self.free_nodes) {
            let choices: Vec<NodeId> = match fixed {
                Some(v) => vec![v],
                None => self.all_nodes[1..].to_vec(),
            };
            out = out
                .into_iter()
                .flat_map(|a| {
                    choices.iter().map(move |&v| {
                        let mut a = a.clone();
                        a.nodes.insert(name.clone(), v);
                        a
                    })
                })
                .collect();
        }
        out
    }

    /// All answers whose paths have length at most `max_len` and that meet
    /// every arithmetical constraint, found by exhaustive search of the
    /// answer graph.
    pub fn answers_up_to(&self, max_len: usize) -> Result<BTreeSet<Answer>, EvalError> {
        let mut out = BTreeSet::new();
        for s in self.start_states()? {
            let w = self.weight(&s)?;
            let mut stack = vec![s];
            self.dfs(&mut stack, w, max_len, &mut out)?;
        }
        Ok(out)
    }

    fn dfs(
        &self,
        stack: &mut Vec<AgState>,
        sums: Vec<ExtInt>,
        budget: usize,
        out: &mut BTreeSet<Answer>,
    ) -> Result<(), EvalError> {
        let top = stack.last().expect("non-empty stack");
        if self.is_target(top) {
            if sums.iter().zip(&self.bounds).all(|(s, &b)| *s <= ExtInt::Fin(b)) {
                out.extend(self.decode(stack));
            }
            return Ok(());
        }
        if budget == 0 {
            return Ok(());
        }
        for next in self.successors(top)? {
            let w = self.weight(&next)?;
            let sums2 = sums
                .iter()
                .zip(&w)
                .map(|(a, b)| a.checked_add(*b))
                .collect::<Result<Vec<_>, _>>()?;
            stack.push(next);
            self.dfs(stack, sums2, budget - 1, out)?;
            stack.pop();
        }
        Ok(())
    }
}

/// Cartesian product of candidate lists, in lexicographic order.
pub(crate) fn cartesian<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::with_capacity(lists.len())];
    for l in lists {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                l.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x.clone());
                    p
                })
            })
            .collect();
    }
    out
}
