use std::collections::BTreeSet;
use std::fmt::Write;

use crate::error::EvalError;
use crate::graph::{ExtInt, LabelSource, NodeId, Path, SINK};
use crate::query::{print_regex, Arg, Atom, Cmp, NodeConstraint, Regex};

pub type LetterId = usize;

/// Per-state outgoing `(letter, target)` pairs.
type Transitions = Vec<Vec<(LetterId, usize)>>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Letter {
    /// Holds exactly when every constrained path has already ended.
    Bottom,
    Nc(NodeConstraint),
}

/// Epsilon-free automaton; letters are stored once and referenced by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    pub letters: Vec<Letter>,
    /// `trans[q]` lists `(letter, target)` pairs.
    pub trans: Vec<Vec<(LetterId, usize)>>,
    pub initial: Vec<usize>,
    pub finals: Vec<bool>,
    /// Number of paths the letters range over.
    pub k: usize,
}

struct Thompson {
    eps: Vec<Vec<usize>>,
    lit: Vec<Vec<(NodeConstraint, usize)>>,
}

impl Thompson {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.lit.push(Vec::new());
        self.eps.len() - 1
    }

    /// Returns (entry, exit).
    fn build(&mut self, r: &Regex) -> (usize, usize) {
        match r {
            Regex::Eps => {
                let s = self.state();
                let t = self.state();
                self.eps[s].push(t);
                (s, t)
            }
            Regex::Letter(nc) => {
                let s = self.state();
                let t = self.state();
                self.lit[s].push((nc.clone(), t));
                (s, t)
            }
            Regex::Concat(a, b) => {
                let (s1, t1) = self.build(a);
                let (s2, t2) = self.build(b);
                self.eps[t1].push(s2);
                (s1, t2)
            }
            Regex::Union(a, b) => {
                let s = self.state();
                let (s1, t1) = self.build(a);
                let (s2, t2) = self.build(b);
                let t = self.state();
                self.eps[s].extend([s1, s2]);
                self.eps[t1].push(t);
                self.eps[t2].push(t);
                (s, t)
            }
            Regex::Star(a) => {
                let s = self.state();
                let (s1, t1) = self.build(a);
                let t = self.state();
                self.eps[s].extend([s1, t]);
                self.eps[t1].extend([s1, t]);
                (s, t)
            }
        }
    }

    fn closure(&self, q: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([q]);
        let mut stack = vec![q];
        while let Some(x) = stack.pop() {
            for &y in &self.eps[x] {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen
    }
}

/// Thompson construction, epsilon elimination, removal of unreachable and
/// dead states, then a bottom self-loop on every final state.
pub fn compile(regex: &Regex, k: usize) -> Nfa {
    let mut th = Thompson {
        eps: Vec::new(),
        lit: Vec::new(),
    };
    let (start, accept) = th.build(regex);
    let n = th.eps.len();

    let closures: Vec<BTreeSet<usize>> = (0..n).map(|q| th.closure(q)).collect();
    let is_final: Vec<bool> = closures.iter().map(|c| c.contains(&accept)).collect();
    let mut direct: Vec<Vec<(NodeConstraint, usize)>> = vec![Vec::new(); n];
    for q in 0..n {
        for &p in &closures[q] {
            for (nc, r) in &th.lit[p] {
                if !direct[q].contains(&(nc.clone(), *r)) {
                    direct[q].push((nc.clone(), *r));
                }
            }
        }
    }

    let mut reach = vec![false; n];
    let mut stack = vec![start];
    reach[start] = true;
    while let Some(q) = stack.pop() {
        for (_, r) in &direct[q] {
            if !reach[*r] {
                reach[*r] = true;
                stack.push(*r);
            }
        }
    }
    // co-reachability; the start state is always kept
    let mut live = is_final.clone();
    loop {
        let mut changed = false;
        for q in 0..n {
            if !live[q] && direct[q].iter().any(|(_, r)| live[*r]) {
                live[q] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut map = vec![usize::MAX; n];
    let mut order = Vec::new();
    for q in 0..n {
        if reach[q] && (live[q] || q == start) {
            map[q] = order.len();
            order.push(q);
        }
    }

    let mut letters: Vec<Letter> = Vec::new();
    let mut letter_id = |l: Letter| -> LetterId {
        match letters.iter().position(|x| *x == l) {
            Some(i) => i,
            None => {
                letters.push(l);
                letters.len() - 1
            }
        }
    };
    let mut trans: Vec<Vec<(LetterId, usize)>> = vec![Vec::new(); order.len()];
    for (new, &old) in order.iter().enumerate() {
        for (nc, r) in &direct[old] {
            if map[*r] != usize::MAX {
                let id = letter_id(Letter::Nc(nc.clone()));
                trans[new].push((id, map[*r]));
            }
        }
    }
    let finals: Vec<bool> = order.iter().map(|&q| is_final[q]).collect();
    let (mut trans, finals, start) = merge_bisimilar(trans, finals, map[start]);
    if finals.iter().any(|&f| f) {
        let bot = letter_id(Letter::Bottom);
        for (q, f) in finals.iter().enumerate() {
            if *f {
                trans[q].push((bot, q));
            }
        }
    }
    Nfa {
        letters,
        trans,
        initial: vec![start],
        finals,
        k,
    }
}

/// Merges states with the same finality and the same outgoing transitions
/// up to merged targets (coarsest bisimulation), which preserves the
/// language.
fn merge_bisimilar(trans: Vec<Vec<(LetterId, usize)>>, finals: Vec<bool>, start: usize) -> (Transitions, Vec<bool>, usize) {
    let n = trans.len();
    let mut class: Vec<usize> = finals.iter().map(|&f| usize::from(f)).collect();
    let mut count = 0;
    loop {
        let mut sigs: Vec<(usize, BTreeSet<(LetterId, usize)>)> = Vec::new();
        let mut next = vec![0; n];
        for q in 0..n {
            let sig = (class[q], trans[q].iter().map(|&(l, r)| (l, class[r])).collect());
            next[q] = match sigs.iter().position(|s| *s == sig) {
                Some(i) => i,
                None => {
                    sigs.push(sig);
                    sigs.len() - 1
                }
            };
        }
        let stable = sigs.len() == count;
        count = sigs.len();
        class = next;
        if stable {
            break;
        }
    }
    let mut out: Vec<BTreeSet<(LetterId, usize)>> = vec![BTreeSet::new(); count];
    let mut fin = vec![false; count];
    for q in 0..n {
        fin[class[q]] = finals[q];
        out[class[q]].extend(trans[q].iter().map(|&(l, r)| (l, class[r])));
    }
    let trans = out.into_iter().map(|s| s.into_iter().collect()).collect();
    (trans, fin, class[start])
}

fn atom_value(src: &dyn LabelSource, a: &Atom, cur: &[NodeId], next: &[NodeId]) -> Result<ExtInt, EvalError> {
    match a {
        Atom::Const(v) => Ok(ExtInt::Fin(*v)),
        Atom::Lab { name, args } => {
            let tuple = args
                .iter()
                .map(|arg| match arg {
                    Arg::Pos { index, next: false } => Ok(cur[index - 1]),
                    Arg::Pos { index, next: true } => Ok(next[index - 1]),
                    Arg::Node(n) => Ok(src.graph().node(n).unwrap_or(SINK)),
                    Arg::Var(v) => Err(EvalError::UnknownLabelling(format!("variable {v} in node constraint"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            src.value_by_name(name, &tuple)
        }
    }
}

pub fn compare(op: Cmp, a: ExtInt, b: ExtInt) -> bool {
    match op {
        Cmp::Le => a <= b,
        Cmp::Lt => a < b,
        Cmp::Eq => a == b,
    }
}

/// Evaluates a node constraint with `@i` bound to `current[i-1]` and `@i'`
/// to `next[i-1]`.
pub fn eval_node_constraint(
    src: &dyn LabelSource,
    nc: &NodeConstraint,
    current: &[NodeId],
    next: &[NodeId],
) -> Result<bool, EvalError> {
    let a = atom_value(src, &nc.lhs, current, next)?;
    let b = atom_value(src, &nc.rhs, current, next)?;
    Ok(compare(nc.op, a, b))
}

impl Nfa {
    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.iter().map(Vec::len).sum()
    }

    pub fn bottom(&self) -> Option<LetterId> {
        self.letters.iter().position(|l| *l == Letter::Bottom)
    }

    pub fn eval_letter(
        &self,
        src: &dyn LabelSource,
        id: LetterId,
        current: &[NodeId],
        next: &[NodeId],
    ) -> Result<bool, EvalError> {
        match &self.letters[id] {
            Letter::Bottom => Ok(current.iter().all(|n| n.is_sink())),
            Letter::Nc(nc) => eval_node_constraint(src, nc, current, next),
        }
    }

    /// States reachable from `states` by reading the letter whose current
    /// nodes are `cur` and next nodes are `next`.
    pub fn step(
        &self,
        src: &dyn LabelSource,
        states: &BTreeSet<usize>,
        cur: &[NodeId],
        next: &[NodeId],
    ) -> Result<BTreeSet<usize>, EvalError> {
        let mut holds: Vec<Option<bool>> = vec![None; self.letters.len()];
        let mut out = BTreeSet::new();
        for &q in states {
            for &(l, r) in &self.trans[q] {
                let v = match holds[l] {
                    Some(v) => v,
                    None => {
                        let v = self.eval_letter(src, l, cur, next)?;
                        holds[l] = Some(v);
                        v
                    }
                };
                if v {
                    out.insert(r);
                }
            }
        }
        Ok(out)
    }

    /// Runs the automaton on the letters of positions `1..=len`.
    pub fn initial_states(&self) -> BTreeSet<usize> {
        self.initial.iter().copied().collect()
    }

    pub fn run(&self, src: &dyn LabelSource, paths: &[Path], len: usize) -> Result<BTreeSet<usize>, EvalError> {
        let mut states = self.initial_states();
        for i in 1..=len {
            if states.is_empty() {
                break;
            }
            let cur: Vec<NodeId> = paths.iter().map(|p| p.at(i)).collect();
            let next: Vec<NodeId> = paths.iter().map(|p| p.at(i + 1)).collect();
            states = self.step(src, &states, &cur, &next)?;
        }
        Ok(states)
    }

    /// Whether the letter word of `paths` (one letter per position up to the
    /// longest path) is accepted.
    pub fn match_paths(&self, src: &dyn LabelSource, paths: &[Path]) -> Result<bool, EvalError> {
        self.accepts_padded(src, paths, 0)
    }

    /// Like [`match_paths`](Self::match_paths) with `extra` further
    /// positions at which every path has ended.
    pub fn accepts_padded(&self, src: &dyn LabelSource, paths: &[Path], extra: usize) -> Result<bool, EvalError> {
        assert_eq!(paths.len(), self.k, "automaton arity");
        let s = paths.iter().map(Path::len).max().unwrap_or(0);
        let states = self.run(src, paths, s + extra)?;
        Ok(states.iter().any(|&q| self.finals[q]))
    }

    /// Line-based listing: `init`, `final` and `q -> r : letter` lines.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "states {}", self.num_states());
        for q in &self.initial {
            let _ = writeln!(s, "init {q}");
        }
        for (q, f) in self.finals.iter().enumerate() {
            if *f {
                let _ = writeln!(s, "final {q}");
            }
        }
        for (q, ts) in self.trans.iter().enumerate() {
            for &(l, r) in ts {
                let label = match &self.letters[l] {
                    Letter::Bottom => "BOTTOM".to_string(),
                    Letter::Nc(nc) => print_regex(&Regex::Letter(nc.clone())),
                };
                let _ = writeln!(s, "{q} -> {r} : {label}");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::graph::Graph;
    use crate::query::parse_regex;

    fn route() -> Nfa {
        compile(&parse_regex("<E(@1, @1') = 1>* <>").unwrap(), 1)
    }

    fn path(g: &Graph, names: &[&str]) -> Path {
        Path(names.iter().map(|n| g.node(n).unwrap()).collect())
    }

    #[test]
    fn route_dump() {
        let expected = "states 2\ninit 0\nfinal 1\n\
                        0 -> 0 : <E(@1, @1') = 1>\n0 -> 1 : <>\n1 -> 1 : BOTTOM\n";
        assert_eq!(route().dump(), expected);
    }

    #[test]
    fn route_matches() {
        let g = corpus::map_graph();
        let nfa = route();
        assert!(nfa.match_paths(&g, &[path(&g, &["S", "T", "P"])]).unwrap());
        assert!(!nfa.match_paths(&g, &[path(&g, &["S", "P"])]).unwrap());
        assert!(!nfa.match_paths(&g, &[Path::empty()]).unwrap());
    }

    #[test]
    fn eval_letters() {
        let g = corpus::map_graph();
        let s = g.node("S").unwrap();
        let t = g.node("T").unwrap();
        let nc = match parse_regex("<E(@1, @1') = 1>").unwrap() {
            Regex::Letter(nc) => nc,
            _ => unreachable!(),
        };
        assert!(eval_node_constraint(&g, &nc, &[s], &[t]).unwrap());
        assert!(eval_node_constraint(&g, &NodeConstraint::top(), &[SINK], &[s]).unwrap());
        let nfa = route();
        let bot = nfa.bottom().unwrap();
        assert!(nfa.eval_letter(&g, bot, &[SINK], &[SINK]).unwrap());
        assert!(!nfa.eval_letter(&g, bot, &[s], &[SINK]).unwrap());
    }

    #[test]
    fn epsilon_and_union() {
        let g = corpus::map_graph();
        let eps = compile(&Regex::Eps, 1);
        assert!(eps.match_paths(&g, &[Path::empty()]).unwrap());
        assert!(!eps.match_paths(&g, &[path(&g, &["S"])]).unwrap());
        let u = compile(&parse_regex("<time(@1) = 10> + <time(@1) = 60>").unwrap(), 1);
        let branches = u.trans[u.initial[0]].iter().filter(|(_, r)| u.finals[*r]).count();
        assert_eq!(branches, 2);
        assert!(u.match_paths(&g, &[path(&g, &["P"])]).unwrap());
        assert!(!u.match_paths(&g, &[path(&g, &["W"])]).unwrap());
    }

    #[test]
    fn bottom_padding_keeps_acceptance() {
        let g = corpus::map_graph();
        let nfa = route();
        let p = [path(&g, &["S", "T", "P"])];
        assert!(nfa.accepts_padded(&g, &p, 3).unwrap());
    }
}
