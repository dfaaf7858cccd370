//! Auxiliary labellings defined by terms, evaluated on demand.
//!
//! An [`ExtendedGraph`] layers the definitions of a `LET` block over a base
//! graph. Definition `i` sees the base labellings and definitions `0..i`.
//! Values are cached per `(definition, tuple)` unless caching is turned off.
//! Nested queries and path extrema inside terms run either on the answer
//! graph and solver or on the brute-force oracle, as chosen by [`Nested`].

use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, HashMap};

use crate::answer_graph::{AnswerGraph, Bindings, Target};
use crate::error::EvalError;
use crate::graph::{ExtInt, Graph, LabelKey, LabelSource, NodeId, SINK};
use crate::oracle::{self, OracleConfig};
use crate::query::{Arg, Definition, Extremum, Func, PraQuery, Term};
use crate::solver::{self, Mode, SolveConfig};

/// Node-variable instantiation.
pub type Instantiation = BTreeMap<String, NodeId>;

/// Evaluator for nested queries and path extrema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Nested {
    Solver(SolveConfig),
    Oracle(OracleConfig),
}

impl Default for Nested {
    fn default() -> Self {
        Nested::Solver(SolveConfig::default())
    }
}

impl Nested {
    fn nonempty(&self, src: &dyn LabelSource, q: &PraQuery, bind: &Bindings) -> Result<bool, EvalError> {
        match self {
            Nested::Solver(cfg) => {
                let ag = AnswerGraph::build(src, q, bind, None)?;
                Ok(solver::check_empty(&ag, cfg)?.nonempty)
            }
            Nested::Oracle(cfg) => oracle::nonempty(src, q, bind, cfg),
        }
    }

    fn extremum(
        &self,
        src: &dyn LabelSource,
        q: &PraQuery,
        bind: &Bindings,
        target: &Target,
        mode: Mode,
    ) -> Result<ExtInt, EvalError> {
        match self {
            Nested::Solver(cfg) => {
                let ag = AnswerGraph::build(src, q, bind, Some(target))?;
                Ok(solver::extremum(&ag, mode, cfg)?.value)
            }
            Nested::Oracle(cfg) => {
                oracle::two_bound_extremum(src, q, bind, target, mode, cfg.max_path_len / 2, cfg)
            }
        }
    }
}

/// Fundamental functions. Aggregates take any number of arguments, the
/// binary ones give 0 unless applied to exactly two.
pub fn eval_fundamental(f: Func, args: &[ExtInt]) -> Result<ExtInt, EvalError> {
    Ok(match f {
        Func::Max => args.iter().copied().max().unwrap_or(ExtInt::NegInf),
        Func::Min => args.iter().copied().min().unwrap_or(ExtInt::PosInf),
        Func::Count => ExtInt::Fin(args.len() as i64),
        Func::Sum => ExtInt::sum(args.iter().copied())?,
        _ if args.len() != 2 => ExtInt::ZERO,
        Func::Plus => args[0].checked_add(args[1])?,
        Func::Minus => args[0].checked_sub(args[1])?,
        Func::Times => args[0].checked_mul(args[1])?,
        Func::Le => ExtInt::from_bool(args[0] <= args[1]),
    })
}

pub struct ExtendedGraph<'g> {
    base: &'g Graph,
    defs: Vec<Definition>,
    nested: Nested,
    memo: RefCell<HashMap<(usize, Vec<NodeId>), ExtInt>>,
    memo_enabled: bool,
    depth: Cell<usize>,
    depth_limit: usize,
}

impl<'g> ExtendedGraph<'g> {
    pub fn new(base: &'g Graph, defs: Vec<Definition>, nested: Nested) -> Self {
        let depth_limit = defs.len() + 1;
        ExtendedGraph {
            base,
            defs,
            nested,
            memo: RefCell::new(HashMap::new()),
            memo_enabled: true,
            depth: Cell::new(0),
            depth_limit,
        }
    }

    pub fn with_memo(mut self, enabled: bool) -> Self {
        self.memo_enabled = enabled;
        self
    }

    pub fn with_depth_limit(mut self, limit: usize) -> Self {
        self.depth_limit = limit;
        self
    }

    pub fn definitions(&self) -> &[Definition] {
        &self.defs
    }

    pub fn clear_memo(&self) {
        self.memo.borrow_mut().clear();
    }

    pub fn memo_len(&self) -> usize {
        self.memo.borrow().len()
    }

    /// The view definition `upto` is evaluated in.
    pub fn prefix(&self, upto: usize) -> Prefix<'_, 'g> {
        Prefix {
            eg: self,
            upto: upto.min(self.defs.len()),
        }
    }

    /// Evaluates a term against the full ontology.
    pub fn eval(&self, t: &Term, eta: &Instantiation) -> Result<ExtInt, EvalError> {
        self.eval_term(self.defs.len(), t, eta)
    }

    fn aux_value(&self, i: usize, tuple: &[NodeId]) -> Result<ExtInt, EvalError> {
        if tuple.iter().any(|n| n.is_sink()) {
            return Ok(ExtInt::ZERO);
        }
        let key = (i, tuple.to_vec());
        if self.memo_enabled {
            if let Some(&v) = self.memo.borrow().get(&key) {
                return Ok(v);
            }
        }
        let d = self.depth.get();
        if d >= self.depth_limit {
            return Err(EvalError::RecursionDepthExceeded { limit: self.depth_limit });
        }
        self.depth.set(d + 1);
        let def = &self.defs[i];
        let eta: Instantiation = def.params.iter().cloned().zip(tuple.iter().copied()).collect();
        let v = self.eval_term(i, &def.body, &eta);
        self.depth.set(d);
        let v = v?;
        if self.memo_enabled {
            self.memo.borrow_mut().insert(key, v);
        }
        Ok(v)
    }

    fn bindings(q: &PraQuery, eta: &Instantiation) -> Bindings {
        Bindings {
            nodes: q
                .match_nodes
                .iter()
                .filter_map(|x| eta.get(x).map(|&v| (x.clone(), v)))
                .collect(),
            paths: BTreeMap::new(),
        }
    }

    fn eval_term(&self, upto: usize, t: &Term, eta: &Instantiation) -> Result<ExtInt, EvalError> {
        let view = self.prefix(upto);
        let var = |x: &str| {
            eta.get(x)
                .copied()
                .ok_or_else(|| EvalError::Binding(format!("variable `{x}` is not instantiated")))
        };
        match t {
            Term::Const(c) => Ok(*c),
            Term::Lab { name, args } => {
                let tuple = args
                    .iter()
                    .map(|a| match a {
                        Arg::Var(x) => var(x),
                        Arg::Node(n) => Ok(self.base.node(n).unwrap_or(SINK)),
                        Arg::Pos { .. } => Err(EvalError::Binding("position variable in a term".into())),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                view.value_by_name(name, &tuple)
            }
            Term::Indicator(q) => {
                let mut q = (**q).clone();
                q.match_paths.clear();
                let b = Self::bindings(&q, eta);
                Ok(ExtInt::from_bool(self.nested.nonempty(&view, &q, &b)?))
            }
            Term::PathExtremum {
                kind,
                label,
                path,
                query,
            } => {
                let target = Target {
                    label: label.clone(),
                    paths: vec![path.clone()],
                };
                let mode = match kind {
                    Extremum::Min => Mode::Min,
                    Extremum::Max => Mode::Max,
                };
                let b = Self::bindings(query, eta);
                self.nested.extremum(&view, query, &b, &target, mode)
            }
            Term::VarEq(a, b) => Ok(ExtInt::from_bool(var(a)? == var(b)?)),
            Term::Apply(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval_term(upto, a, eta))
                    .collect::<Result<Vec<_>, _>>()?;
                eval_fundamental(*f, &vals)
            }
            Term::Aggregate {
                func,
                var: x,
                value,
                filter,
            } => {
                let mut eta2 = eta.clone();
                let mut vals = Vec::new();
                for v in self.base.nodes() {
                    eta2.insert(x.clone(), v);
                    if self.eval_term(upto, filter, &eta2)? == ExtInt::ONE {
                        vals.push(self.eval_term(upto, value, &eta2)?);
                    }
                }
                eval_fundamental(*func, &vals)
            }
        }
    }
}

/// A view of the base graph plus the first `upto` definitions.
pub struct Prefix<'a, 'g> {
    eg: &'a ExtendedGraph<'g>,
    upto: usize,
}

impl LabelSource for Prefix<'_, '_> {
    fn graph(&self) -> &Graph {
        self.eg.base
    }

    fn resolve(&self, name: &str) -> Option<(LabelKey, usize)> {
        match self.eg.defs[..self.upto].iter().position(|d| d.name == name) {
            Some(i) => Some((LabelKey::Aux(i), self.eg.defs[i].params.len())),
            None => self.eg.base.resolve(name),
        }
    }

    fn value(&self, key: LabelKey, tuple: &[NodeId]) -> Result<ExtInt, EvalError> {
        match key {
            LabelKey::Base(_) => self.eg.base.value(key, tuple),
            LabelKey::Aux(i) if i < self.upto => self.eg.aux_value(i, tuple),
            LabelKey::Aux(i) => Err(EvalError::UnknownLabelling(self.eg.defs[i].name.clone())),
        }
    }
}

impl LabelSource for ExtendedGraph<'_> {
    fn graph(&self) -> &Graph {
        self.base
    }

    fn resolve(&self, name: &str) -> Option<(LabelKey, usize)> {
        self.prefix(self.defs.len()).resolve(name)
    }

    fn value(&self, key: LabelKey, tuple: &[NodeId]) -> Result<ExtInt, EvalError> {
        self.prefix(self.defs.len()).value(key, tuple)
    }
}
