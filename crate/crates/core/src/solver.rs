//! Emptiness and extrema over answer-graph paths under arithmetical
//! constraints.
//!
//! Every product state carries a weight vector (one entry per arithmetical
//! constraint, plus the target labelling for extrema). A path is admissible
//! when its summed vector is componentwise within the constraint bounds.
//!
//! The search runs breadth-first over configurations `(state, sums)`,
//! layer by layer in path length. A configuration is dropped when an earlier
//! one at the same state is at least as good in every component, or when
//! the cheapest possible completion already breaks a bound.
//!
//! There are two modes:
//!
//! * Explicit bounds (`b1` or `b2` set): the search stops at length `b2`.
//!   A minimum over lengths `<= b1` that some longer admissible path (up to
//!   `b2`) still beats is reported as `-inf`.
//! * Automatic bounds: `b1` and `b2` are derived from the size of the
//!   product and the largest weight. In addition, whenever a path revisits a
//!   product state after a cycle that lowers no component's prospects and
//!   strictly lowers some, those components become `-inf`, since the cycle
//!   can be repeated at will.

use std::collections::{HashMap, VecDeque};

use crate::answer_graph::{AgState, Answer, AnswerGraph};
use crate::error::EvalError;
use crate::graph::{ExtInt, Path};

/// Default cap on materialized product states plus search configurations.
pub const DEFAULT_VISITED_BUDGET: usize = 1_000_000;

/// Longest witness produced when expanding repeated cycles.
const MAX_WITNESS_LEN: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveConfig {
    /// Short-path bound; defaults to half of `b2` or to the derived bound.
    pub b1: Option<usize>,
    /// Witness-length bound; defaults to twice `b1`.
    pub b2: Option<usize>,
    pub visited_budget: usize,
    /// Log one line per expanded configuration at `info` level under the
    /// `opra::trace` target.
    pub trace: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            b1: None,
            b2: None,
            visited_budget: DEFAULT_VISITED_BUDGET,
            trace: false,
        }
    }
}

impl SolveConfig {
    pub fn with_bounds(b1: usize, b2: usize) -> Self {
        SolveConfig {
            b1: Some(b1),
            b2: Some(b2),
            ..Default::default()
        }
    }

    fn explicit(&self) -> bool {
        self.b1.is_some() || self.b2.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Min,
    Max,
}

/// A satisfying path tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// One path per path variable, in [`AnswerGraph::path_vars`] order.
    pub paths: Vec<Path>,
    /// The free variables, with unconstrained free nodes taken as the
    /// first node of the graph.
    pub answer: Answer,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Product states materialized.
    pub states: usize,
    /// Search configurations created.
    pub configs: usize,
    pub b1: usize,
    pub b2: usize,
    /// Whether some repeated cycle was turned into an infinite value.
    pub pumped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptinessResult {
    pub nonempty: bool,
    pub witness: Option<Witness>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremumResult {
    pub value: ExtInt,
    /// Present whenever `value` is finite.
    pub witness: Option<Witness>,
    pub stats: SolveStats,
}

/// The reachable part of an answer graph, with states that cannot reach a
/// target already removed.
pub struct Product {
    pub states: Vec<AgState>,
    pub succ: Vec<Vec<u32>>,
    pub start: Vec<u32>,
    pub target: Vec<bool>,
    /// Constraint weights, then the target weight when one was requested.
    pub weights: Vec<Vec<ExtInt>>,
}

/// Materializes the reachable product, failing once more than `budget`
/// states have been seen.
pub fn explore(ag: &AnswerGraph<'_>, budget: usize) -> Result<Product, EvalError> {
    let mut index: HashMap<AgState, u32> = HashMap::new();
    let mut states = Vec::new();
    let mut succ: Vec<Vec<u32>> = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |s: AgState, states: &mut Vec<AgState>, queue: &mut VecDeque<u32>| -> Result<u32, EvalError> {
        if let Some(&i) = index.get(&s) {
            return Ok(i);
        }
        if states.len() >= budget {
            return Err(EvalError::ResourceExceeded { budget });
        }
        let i = states.len() as u32;
        index.insert(s.clone(), i);
        states.push(s);
        queue.push_back(i);
        Ok(i)
    };
    let mut start = Vec::new();
    for s in ag.start_states()? {
        let i = intern(s, &mut states, &mut queue)?;
        if !start.contains(&i) {
            start.push(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let st = states[i as usize].clone();
        let mut out = Vec::new();
        if !ag.is_target(&st) {
            for s in ag.successors(&st)? {
                out.push(intern(s, &mut states, &mut queue)?);
            }
        }
        if succ.len() <= i as usize {
            succ.resize(i as usize + 1, Vec::new());
        }
        succ[i as usize] = out;
    }
    succ.resize(states.len(), Vec::new());
    let target: Vec<bool> = states.iter().map(|s| ag.is_target(s)).collect();

    // keep states from which some target is reachable
    let mut pred: Vec<Vec<u32>> = vec![Vec::new(); states.len()];
    for (i, out) in succ.iter().enumerate() {
        for &j in out {
            pred[j as usize].push(i as u32);
        }
    }
    let mut live = target.clone();
    let mut stack: Vec<u32> = (0..states.len() as u32).filter(|&i| live[i as usize]).collect();
    while let Some(j) = stack.pop() {
        for &i in &pred[j as usize] {
            if !live[i as usize] {
                live[i as usize] = true;
                stack.push(i);
            }
        }
    }
    let mut remap = vec![u32::MAX; states.len()];
    let mut kept = Vec::new();
    for (i, s) in states.into_iter().enumerate() {
        if live[i] {
            remap[i] = kept.len() as u32;
            kept.push(s);
        }
    }
    let succ: Vec<Vec<u32>> = succ
        .into_iter()
        .enumerate()
        .filter(|(i, _)| live[*i])
        .map(|(_, out)| out.into_iter().map(|j| remap[j as usize]).filter(|&j| j != u32::MAX).collect())
        .collect();
    let start = start.into_iter().map(|i| remap[i as usize]).filter(|&i| i != u32::MAX).collect();
    let target = kept.iter().map(|s| ag.is_target(s)).collect();
    let mut weights = Vec::with_capacity(kept.len());
    for s in &kept {
        let mut w = ag.weight(s)?;
        if ag.has_target() {
            w.push(ag.extremum_weight(s)?);
        }
        weights.push(w);
    }
    Ok(Product {
        states: kept,
        succ,
        start,
        target,
        weights,
    })
}

/// Work cap for the Bellman-Ford pass; above it, completion bounds are
/// skipped and pruning relies on dominance alone.
const BOUND_WORK_CAP: usize = 20_000_000;

/// Per dimension and state, the least sum of weights over the states
/// strictly after it on a path to a target; `None` means unbounded below.
fn completion_bounds(p: &Product, dims: usize) -> Vec<Vec<Option<i128>>> {
    let n = p.states.len();
    let edges: usize = p.succ.iter().map(Vec::len).sum();
    let mut out = Vec::with_capacity(dims);
    for d in 0..dims {
        let finite = p.weights.iter().all(|w| w[d].is_finite());
        if !finite || n.saturating_mul(edges.max(1)) > BOUND_WORK_CAP {
            out.push(vec![None; n]);
            continue;
        }
        let w: Vec<i128> = p.weights.iter().map(|w| w[d].finite().unwrap() as i128).collect();
        let mut dist: Vec<Option<i128>> = p.target.iter().map(|&t| if t { Some(0) } else { None }).collect();
        let relax = |dist: &mut Vec<Option<i128>>| -> Vec<usize> {
            let mut changed = Vec::new();
            for q in 0..n {
                if p.target[q] {
                    continue;
                }
                for &r in &p.succ[q] {
                    if let Some(dr) = dist[r as usize] {
                        let cand = w[r as usize] + dr;
                        if dist[q].is_none_or(|dq| cand < dq) {
                            dist[q] = Some(cand);
                            if changed.last() != Some(&q) {
                                changed.push(q);
                            }
                        }
                    }
                }
            }
            changed
        };
        let mut unbounded = Vec::new();
        for round in 0..=n {
            let changed = relax(&mut dist);
            if changed.is_empty() {
                break;
            }
            if round == n {
                unbounded = changed;
            }
        }
        let mut res: Vec<Option<i128>> = dist;
        if !unbounded.is_empty() {
            let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
            for (q, out) in p.succ.iter().enumerate() {
                for &r in out {
                    pred[r as usize].push(q);
                }
            }
            let mut neg = vec![false; n];
            let mut stack = unbounded;
            while let Some(q) = stack.pop() {
                if neg[q] {
                    continue;
                }
                neg[q] = true;
                res[q] = None;
                stack.extend(pred[q].iter().copied().filter(|&x| !neg[x]));
            }
        }
        out.push(res);
    }
    out
}

fn derived_b1(states: usize, dims: usize, max_w: u64) -> usize {
    let s = states.max(1) as u64;
    let d = dims as u32;
    let base = 2u64
        .saturating_mul(dims as u64)
        .saturating_mul(max_w.max(1))
        .saturating_mul(s)
        .saturating_add(1);
    let b = s.saturating_mul(base.saturating_pow(d));
    usize::try_from(b).unwrap_or(usize::MAX).clamp(1, usize::MAX / 2)
}

fn resolve_bounds(cfg: &SolveConfig, p: &Product, dims: usize) -> Result<(usize, usize), EvalError> {
    let (b1, b2) = match (cfg.b1, cfg.b2) {
        (Some(a), Some(b)) => (a, b),
        (Some(a), None) => (a, a.saturating_mul(2)),
        (None, Some(b)) => (b / 2, b),
        (None, None) => {
            let max_w = p
                .weights
                .iter()
                .flatten()
                .filter_map(|w| w.finite())
                .map(|v| v.unsigned_abs())
                .max()
                .unwrap_or(1);
            let b1 = derived_b1(p.states.len(), dims.max(1), max_w);
            (b1, b1.saturating_mul(2))
        }
    };
    if b1 == 0 || b1 >= b2 {
        return Err(EvalError::Config(format!("bounds must satisfy 0 < b1 < b2, got b1 = {b1}, b2 = {b2}")));
    }
    Ok((b1, b2))
}

struct Config {
    state: u32,
    parent: u32,
    /// Sums with repeated cycles turned into `-inf`.
    v: Vec<ExtInt>,
    /// Sums along the actual tree path.
    real: Vec<ExtInt>,
    /// Ancestor closing a cycle that was marked as repeatable.
    pump: Option<u32>,
    dead: bool,
}

const NO_PARENT: u32 = u32::MAX;

fn dominates(a: &[ExtInt], b: &[ExtInt]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn add(a: &[ExtInt], b: &[ExtInt]) -> Result<Vec<ExtInt>, EvalError> {
    a.iter().zip(b).map(|(x, y)| x.checked_add(*y)).collect()
}

struct Search<'p> {
    p: &'p Product,
    bounds: Vec<i64>,
    /// Index of the target dimension, if any.
    tdim: Option<usize>,
    rem: Vec<Vec<Option<i128>>>,
    pumping: bool,
    budget: usize,
    trace: bool,
    arena: Vec<Config>,
    pareto: Vec<Vec<u32>>,
    pumped: bool,
}

enum Step {
    Continue,
    Stop,
}

impl<'p> Search<'p> {
    fn over_bound(&self, state: usize, v: &[ExtInt], incumbent: Option<ExtInt>) -> bool {
        let exceeds = |d: usize, limit: ExtInt| -> bool {
            match (v[d], self.rem[d][state]) {
                (ExtInt::Fin(x), Some(r)) => match limit {
                    ExtInt::Fin(c) => x as i128 + r > c as i128,
                    ExtInt::NegInf => true,
                    ExtInt::PosInf => false,
                },
                (ExtInt::PosInf, _) => limit != ExtInt::PosInf,
                _ => false,
            }
        };
        for (d, &c) in self.bounds.iter().enumerate() {
            if exceeds(d, ExtInt::Fin(c)) {
                return true;
            }
        }
        match (self.tdim, incumbent) {
            // strictly worse than the incumbent; ties are kept
            (Some(t), Some(inc)) => match (v[t], self.rem[t][state], inc) {
                (ExtInt::Fin(x), Some(r), ExtInt::Fin(c)) => x as i128 + r > c as i128,
                _ => false,
            },
            _ => false,
        }
    }

    fn admissible(&self, v: &[ExtInt]) -> bool {
        self.bounds.iter().enumerate().all(|(d, &c)| v[d] <= ExtInt::Fin(c))
    }

    /// Looks back along the tree path for the same state with no better
    /// sums; the components the cycle strictly lowers become `-inf`.
    fn try_pump(&self, parent: u32, state: u32, v: &mut [ExtInt], real: &[ExtInt]) -> Option<u32> {
        let window = self.p.states.len() + 1;
        let mut a = parent;
        let mut steps = 0;
        while a != NO_PARENT && steps < window {
            let anc = &self.arena[a as usize];
            if anc.state == state {
                let effect: Option<Vec<i128>> = real
                    .iter()
                    .zip(&anc.real)
                    .map(|(x, y)| match (x, y) {
                        (ExtInt::Fin(x), ExtInt::Fin(y)) => Some(*x as i128 - *y as i128),
                        _ => None,
                    })
                    .collect();
                if let Some(e) = effect {
                    if e.iter().all(|&x| x <= 0) && e.iter().zip(v.iter()).any(|(&x, y)| x < 0 && y.is_finite()) {
                        for (d, &x) in e.iter().enumerate() {
                            if x < 0 {
                                v[d] = ExtInt::NegInf;
                            }
                        }
                        return Some(a);
                    }
                }
            }
            a = anc.parent;
            steps += 1;
        }
        None
    }

    /// Adds a configuration unless an existing one at the same state is at
    /// least as good; returns its index.
    fn insert(&mut self, c: Config) -> Result<Option<u32>, EvalError> {
        let s = c.state as usize;
        if self.pareto[s].iter().any(|&i| dominates(&self.arena[i as usize].v, &c.v)) {
            return Ok(None);
        }
        if self.arena.len() + self.p.states.len() >= self.budget {
            return Err(EvalError::ResourceExceeded { budget: self.budget });
        }
        let idx = self.arena.len() as u32;
        let arena = &mut self.arena;
        self.pareto[s].retain(|&i| {
            if dominates(&c.v, &arena[i as usize].v) {
                arena[i as usize].dead = true;
                false
            } else {
                true
            }
        });
        self.pareto[s].push(idx);
        self.arena.push(c);
        Ok(Some(idx))
    }

    /// Runs the layered search up to length `b2`, calling `hit` on every
    /// admissible configuration at a target state together with its length.
    fn run(
        &mut self,
        b2: usize,
        incumbent: &mut Option<ExtInt>,
        mut hit: impl FnMut(&Self, u32, usize, &mut Option<ExtInt>) -> Step,
    ) -> Result<(), EvalError> {
        let mut frontier = Vec::new();
        for &s in &self.p.start {
            let w = self.p.weights[s as usize].clone();
            if self.over_bound(s as usize, &w, *incumbent) {
                continue;
            }
            let c = Config {
                state: s,
                parent: NO_PARENT,
                v: w.clone(),
                real: w,
                pump: None,
                dead: false,
            };
            if let Some(i) = self.insert(c)? {
                frontier.push(i);
            }
        }
        for len in 0..=b2 {
            if frontier.is_empty() {
                break;
            }
            let mut next = Vec::new();
            for &i in &frontier {
                let (state, dead) = {
                    let c = &self.arena[i as usize];
                    (c.state as usize, c.dead)
                };
                if self.p.target[state] {
                    if self.admissible(&self.arena[i as usize].v) {
                        if let Step::Stop = hit(self, i, len, incumbent) {
                            return Ok(());
                        }
                    }
                    continue;
                }
                if dead || len == b2 {
                    continue;
                }
                if self.trace {
                    log::info!(target: "opra::trace", "expand len={len} state={state} sums={:?}", self.arena[i as usize].v);
                }
                for &r in &self.p.succ[state] {
                    let w = &self.p.weights[r as usize];
                    let c = &self.arena[i as usize];
                    let mut v = add(&c.v, w)?;
                    let real = add(&c.real, w)?;
                    let pump = if self.pumping {
                        self.try_pump(i, r, &mut v, &real)
                    } else {
                        None
                    };
                    if self.over_bound(r as usize, &v, *incumbent) {
                        continue;
                    }
                    self.pumped |= pump.is_some();
                    let cfg = Config {
                        state: r,
                        parent: i,
                        v,
                        real,
                        pump,
                        dead: false,
                    };
                    if let Some(j) = self.insert(cfg)? {
                        next.push(j);
                    }
                }
            }
            frontier = next;
        }
        Ok(())
    }

    /// The tree path ending at `idx`, with each repeatable cycle inserted
    /// `k` extra times.
    fn expand(&self, idx: u32, k: usize) -> Option<Vec<u32>> {
        let mut chain = Vec::new();
        let mut i = idx;
        while i != NO_PARENT {
            chain.push(i);
            i = self.arena[i as usize].parent;
        }
        chain.reverse();
        let mut out: Vec<u32> = Vec::new();
        for (pos, &c) in chain.iter().enumerate() {
            out.push(self.arena[c as usize].state);
            if let Some(a) = self.arena[c as usize].pump {
                let from = chain.iter().position(|&x| x == a).expect("ancestor on chain");
                let segment: Vec<u32> = chain[from + 1..=pos].iter().map(|&x| self.arena[x as usize].state).collect();
                for _ in 0..k {
                    if out.len() + segment.len() > MAX_WITNESS_LEN {
                        return None;
                    }
                    out.extend_from_slice(&segment);
                }
            }
        }
        Some(out)
    }

    fn sums(&self, states: &[u32]) -> Result<Vec<ExtInt>, EvalError> {
        let dims = self.p.weights.first().map_or(0, Vec::len);
        let mut acc = vec![ExtInt::ZERO; dims];
        for &s in states {
            acc = add(&acc, &self.p.weights[s as usize])?;
        }
        Ok(acc)
    }

    /// A concrete admissible state sequence for configuration `idx`,
    /// repeating cycles as often as the bounds require.
    fn witness_states(&self, idx: u32) -> Result<Option<Vec<u32>>, EvalError> {
        let mut k = 0usize;
        loop {
            let Some(states) = self.expand(idx, k) else {
                return Ok(None);
            };
            if self.admissible(&self.sums(&states)?) {
                return Ok(Some(states));
            }
            k = if k == 0 { 1 } else { k * 2 };
        }
    }
}

fn witness(ag: &AnswerGraph<'_>, p: &Product, states: &[u32]) -> Witness {
    let seq: Vec<AgState> = states.iter().map(|&s| p.states[s as usize].clone()).collect();
    Witness {
        paths: ag.decode_paths(&seq),
        answer: ag.decode(&seq).into_iter().next().unwrap_or_default(),
    }
}

fn new_search<'p>(ag: &AnswerGraph<'_>, p: &'p Product, cfg: &SolveConfig, tdim: Option<usize>) -> Search<'p> {
    let dims = ag.dims() + usize::from(tdim.is_some());
    Search {
        p,
        bounds: ag.bounds().to_vec(),
        tdim,
        rem: completion_bounds(p, dims),
        pumping: !cfg.explicit(),
        budget: cfg.visited_budget,
        trace: cfg.trace,
        arena: Vec::new(),
        pareto: vec![Vec::new(); p.states.len()],
        pumped: false,
    }
}

/// Whether some start-to-target path of length at most `b2` meets every
/// arithmetical constraint.
pub fn check_empty(ag: &AnswerGraph<'_>, cfg: &SolveConfig) -> Result<EmptinessResult, EvalError> {
    let p = explore(ag, cfg.visited_budget)?;
    let (b1, b2) = resolve_bounds(cfg, &p, ag.dims() + 1)?;
    // the target weight, if any, plays no part here
    let p = Product {
        weights: p.weights.iter().map(|w| w[..ag.dims()].to_vec()).collect(),
        ..p
    };
    let mut search = new_search(ag, &p, cfg, None);
    let mut found = None;
    search.run(b2, &mut None, |_, i, _, _| {
        found = Some(i);
        Step::Stop
    })?;
    let witness = match found {
        Some(i) => search.witness_states(i)?.map(|s| witness(ag, &p, &s)),
        None => None,
    };
    Ok(EmptinessResult {
        nonempty: found.is_some(),
        witness,
        stats: SolveStats {
            states: p.states.len(),
            configs: search.arena.len(),
            b1,
            b2,
            pumped: search.pumped,
        },
    })
}

/// Minimum or maximum of the target labelling over admissible paths.
///
/// The answer graph must have been built with a target.
pub fn extremum(ag: &AnswerGraph<'_>, mode: Mode, cfg: &SolveConfig) -> Result<ExtremumResult, EvalError> {
    if !ag.has_target() {
        return Err(EvalError::Config("extremum needs a target labelling".into()));
    }
    let mut p = explore(ag, cfg.visited_budget)?;
    let t = ag.dims();
    if mode == Mode::Max {
        for w in &mut p.weights {
            w[t] = -w[t];
        }
    }
    let (b1, b2) = resolve_bounds(cfg, &p, t + 1)?;
    let mut search = new_search(ag, &p, cfg, Some(t));

    let mut best_short: Option<(ExtInt, u32)> = None;
    let mut best_long: Option<ExtInt> = None;
    let mut unbounded = false;
    let mut incumbent = None;
    search.run(b2, &mut incumbent, |s, i, len, inc| {
        let v = s.arena[i as usize].v[t];
        if v == ExtInt::NegInf {
            unbounded = true;
            return Step::Stop;
        }
        if inc.is_none_or(|c| v < c) {
            *inc = Some(v);
        }
        if len <= b1 {
            if best_short.is_none_or(|(b, _)| v < b) {
                best_short = Some((v, i));
            }
            Step::Continue
        } else {
            best_long = Some(best_long.map_or(v, |b: ExtInt| b.min(v)));
            match best_short {
                Some((b, _)) if v >= b => Step::Continue,
                _ => Step::Stop,
            }
        }
    })?;

    let stats = |search: &Search<'_>| SolveStats {
        states: p.states.len(),
        configs: search.arena.len(),
        b1,
        b2,
        pumped: search.pumped,
    };
    let beaten = match (best_long, best_short) {
        (Some(l), Some((s, _))) => l < s,
        (Some(_), None) => true,
        _ => false,
    };
    let (value, witness) = if unbounded || beaten {
        (ExtInt::NegInf, None)
    } else if let Some((v, i)) = best_short {
        let w = search.witness_states(i)?.map(|s| witness(ag, &p, &s));
        (v, w)
    } else {
        (ExtInt::PosInf, None)
    };
    let value = if mode == Mode::Max { -value } else { value };
    let witness = if value.is_finite() { witness } else { None };
    Ok(ExtremumResult {
        value,
        witness,
        stats: stats(&search),
    })
}
