//! Random instance generators and small independent reference checks
//! shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use opra::embedding::{DataGraph, WeightedAutomaton};
use opra::graph::{ExtInt, Graph, NodeId, Path};
use opra::query::{Arg, Atom, Cmp, NodeConstraint, Regex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn node_name(i: usize) -> String {
    format!("n{i}")
}

/// A graph on `n` nodes with unary labellings `a` and `b` in `[-3, 3]` and
/// an edge labelling `E` of out-degree at most `max_out`.
pub fn small_graph(r: &mut ChaCha8Rng, n: usize, max_out: usize) -> Graph {
    random_graph(r, n, 0..=max_out)
}

pub fn random_graph(r: &mut ChaCha8Rng, n: usize, out_degree: std::ops::RangeInclusive<usize>) -> Graph {
    let names: Vec<String> = (0..n).map(node_name).collect();
    let mut b = Graph::builder();
    for x in &names {
        b.node(x).unwrap();
    }
    b.labelling("a", 1, ExtInt::ZERO).unwrap();
    b.labelling("b", 1, ExtInt::ZERO).unwrap();
    b.labelling("E", 2, ExtInt::ZERO).unwrap();
    for x in &names {
        b.set("a", &[x], r.gen_range(-3..=3)).unwrap();
        b.set("b", &[x], r.gen_range(-3..=3)).unwrap();
        let out = r.gen_range(out_degree.clone());
        let mut targets: Vec<&String> = names.iter().collect();
        targets.shuffle(r);
        for y in targets.into_iter().take(out) {
            b.set("E", &[x, y], 1).unwrap();
        }
    }
    b.build()
}

fn cmp_text(r: &mut ChaCha8Rng) -> &'static str {
    ["<=", "<", "=", ">=", ">"][r.gen_range(0..5)]
}

/// A letter over `k` paths, in query syntax.
pub fn letter_text(r: &mut ChaCha8Rng, k: usize) -> String {
    let i = r.gen_range(1..=k);
    let j = r.gen_range(1..=k);
    let lab = ["a", "b"][r.gen_range(0..2)];
    match r.gen_range(0..6) {
        0 => "<>".to_string(),
        1 => format!("<E(@{i}, @{j}') = 1>"),
        2 => format!("<{lab}(@{i}) {} {}>", cmp_text(r), r.gen_range(-3..=3)),
        3 => format!("<{lab}(@{i}) {} b(@{j}')>", cmp_text(r)),
        4 => format!("<a(@{i}) {} {lab}(@{j})>", cmp_text(r)),
        _ => format!("<{lab}(@{i}') {} {}>", cmp_text(r), r.gen_range(-3..=3)),
    }
}

/// A regular expression of nesting depth at most `depth`.
pub fn regex_text(r: &mut ChaCha8Rng, k: usize, depth: usize) -> String {
    if depth == 0 {
        return letter_text(r, k);
    }
    match r.gen_range(0..6) {
        0 | 1 => letter_text(r, k),
        2 => format!("({} {})", regex_text(r, k, depth - 1), regex_text(r, k, depth - 1)),
        3 => format!("({} + {})", regex_text(r, k, depth - 1), regex_text(r, k, depth - 1)),
        4 => format!("({})*", regex_text(r, k, depth - 1)),
        _ => format!("({} + EPS)", regex_text(r, k, depth - 1)),
    }
}

pub const ROUTE: &str = "(<E(@1, @1') = 1>* <>)";

/// A random query over [`small_graph`] labellings with `k` route-shaped
/// path variables, one extra regular constraint of depth at most 3 and up
/// to two arithmetical constraints.
pub fn small_query(r: &mut ChaCha8Rng, k: usize) -> String {
    let paths = ["p", "r"];
    let mut text = String::from("MATCH NODES (s, t), PATHS (");
    text += &paths[..k].join(", ");
    text += ") SUCH THAT s -p-> t";
    if k == 2 && r.gen_bool(0.5) {
        text += " AND s -r-> u";
    }
    text += " WHERE ";
    let mut regs: Vec<String> = paths[..k].iter().map(|p| format!("{ROUTE}({p})")).collect();
    regs.push(format!("({})({})", regex_text(r, k, 3), paths[..k].join(", ")));
    text += &regs.join(" AND ");
    let n_arith = r.gen_range(0..=2);
    let mut ariths = Vec::new();
    for _ in 0..n_arith {
        let mut terms = Vec::new();
        for _ in 0..r.gen_range(1..=2) {
            let c: i64 = *[-2, -1, 1, 2].choose(r).unwrap();
            let lab = ["a", "b"][r.gen_range(0..2)];
            let p = paths[r.gen_range(0..k)];
            terms.push(format!("{c} * {lab}[{p}]"));
        }
        let op = ["<=", ">="][r.gen_range(0..2)];
        ariths.push(format!("{} {op} {}", terms.join(" + "), r.gen_range(-4..=6)));
    }
    if !ariths.is_empty() {
        text += " HAVING ";
        text += &ariths.join(" AND ");
    }
    text
}

/// A path of up to `max_len` nodes; half of them follow `E` edges until
/// they get stuck, the others jump anywhere.
pub fn random_path(r: &mut ChaCha8Rng, g: &Graph, max_len: usize) -> Path {
    let nodes: Vec<NodeId> = g.nodes().filter(|n| !n.is_sink()).collect();
    let len = r.gen_range(0..=max_len);
    let walk = r.gen_bool(0.5);
    let mut out: Vec<NodeId> = Vec::with_capacity(len);
    for _ in 0..len {
        let next = match out.last() {
            Some(&u) if walk => {
                let succ: Vec<NodeId> =
                    nodes.iter().copied().filter(|&v| g.label_value("E", &[u, v]).unwrap() == 1).collect();
                match succ.choose(r) {
                    Some(&v) => v,
                    None => break,
                }
            }
            _ => *nodes.choose(r).unwrap(),
        };
        out.push(next);
    }
    Path::new(out)
}

fn atom_value(g: &Graph, a: &Atom, paths: &[Path], i: usize) -> ExtInt {
    match a {
        Atom::Const(c) => ExtInt::Fin(*c),
        Atom::Lab { name, args } => {
            let tuple: Vec<NodeId> = args
                .iter()
                .map(|arg| match arg {
                    Arg::Pos { index, next } => paths[index - 1].at(i + usize::from(*next)),
                    Arg::Node(n) => g.node(n).unwrap(),
                    Arg::Var(v) => panic!("variable {v} in a letter"),
                })
                .collect();
            g.label_value(name, &tuple).unwrap()
        }
    }
}

/// Whether a letter holds at position `i` (1-based) of the path tuple.
pub fn letter_holds(g: &Graph, nc: &NodeConstraint, paths: &[Path], i: usize) -> bool {
    let (a, b) = (atom_value(g, &nc.lhs, paths, i), atom_value(g, &nc.rhs, paths, i));
    match nc.op {
        Cmp::Le => a <= b,
        Cmp::Lt => a < b,
        Cmp::Eq => a == b,
    }
}

/// Interval membership: `m(re, i, j)` iff the letters at positions
/// `i+1..=j` spell a word of `re`, computed by induction on the regex.
pub fn spells<F: Fn(&NodeConstraint, usize) -> bool>(re: &Regex, n: usize, letter: &F) -> bool {
    let table = intervals(re, n, letter);
    table[0][n]
}

fn intervals<F: Fn(&NodeConstraint, usize) -> bool>(re: &Regex, n: usize, letter: &F) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n + 1]; n + 1];
    match re {
        Regex::Eps => {
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = true;
            }
        }
        Regex::Letter(nc) => {
            for i in 0..n {
                m[i][i + 1] = letter(nc, i + 1);
            }
        }
        Regex::Union(a, b) => {
            let (x, y) = (intervals(a, n, letter), intervals(b, n, letter));
            for i in 0..=n {
                for j in i..=n {
                    m[i][j] = x[i][j] || y[i][j];
                }
            }
        }
        Regex::Concat(a, b) => {
            let (x, y) = (intervals(a, n, letter), intervals(b, n, letter));
            for i in 0..=n {
                for j in i..=n {
                    m[i][j] = (i..=j).any(|k| x[i][k] && y[k][j]);
                }
            }
        }
        Regex::Star(a) => {
            let x = intervals(a, n, letter);
            // by increasing span: empty, or a non-empty first factor
            for span in 0..=n {
                for i in 0..=n - span {
                    let j = i + span;
                    m[i][j] = span == 0 || (i + 1..=j).any(|k| x[i][k] && m[k][j]);
                }
            }
        }
    }
    m
}

/// A data graph with `n` nodes, alphabet `{a, b}`, label vectors of length
/// `dim` in `[-3, 3]` and random labelled edges.
pub fn data_graph(r: &mut ChaCha8Rng, n: usize, dim: usize) -> DataGraph {
    let nodes: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let alphabet = vec!["a".to_string(), "b".to_string()];
    let mut edges = BTreeSet::new();
    for _ in 0..r.gen_range(n..=2 * n + 1) {
        let u = nodes.choose(r).unwrap().clone();
        let w = nodes.choose(r).unwrap().clone();
        edges.insert((u, alphabet.choose(r).unwrap().clone(), w));
    }
    let labels = nodes
        .iter()
        .map(|x| (x.clone(), (0..dim).map(|_| r.gen_range(-3..=3)).collect()))
        .collect();
    DataGraph {
        nodes,
        alphabet,
        edges: edges.into_iter().collect(),
        labels,
        dim,
    }
}

/// Regular expression over data-graph symbols.
#[derive(Debug, Clone)]
pub enum SymRe {
    Sym(&'static str),
    Cat(Box<SymRe>, Box<SymRe>),
    Alt(Box<SymRe>, Box<SymRe>),
    Star(Box<SymRe>),
    Eps,
}

pub fn sym_re(r: &mut ChaCha8Rng, depth: usize) -> SymRe {
    let sym = |r: &mut ChaCha8Rng| SymRe::Sym(["a", "b"][r.gen_range(0..2)]);
    if depth == 0 {
        return sym(r);
    }
    match r.gen_range(0..5) {
        0 => sym(r),
        1 => SymRe::Cat(Box::new(sym_re(r, depth - 1)), Box::new(sym_re(r, depth - 1))),
        2 => SymRe::Alt(Box::new(sym_re(r, depth - 1)), Box::new(sym_re(r, depth - 1))),
        3 => SymRe::Star(Box::new(sym_re(r, depth - 1))),
        _ => SymRe::Eps,
    }
}

impl SymRe {
    /// Whether `word` is in the language, by splitting.
    pub fn matches(&self, word: &[&str]) -> bool {
        match self {
            SymRe::Eps => word.is_empty(),
            SymRe::Sym(s) => word.len() == 1 && word[0] == *s,
            SymRe::Alt(a, b) => a.matches(word) || b.matches(word),
            SymRe::Cat(a, b) => (0..=word.len()).any(|k| a.matches(&word[..k]) && b.matches(&word[k..])),
            SymRe::Star(a) => word.is_empty() || (1..=word.len()).any(|k| a.matches(&word[..k]) && self.matches(&word[k..])),
        }
    }

    /// Query syntax, with each symbol replaced by a step along an edge of
    /// the embedded data graph.
    pub fn embedded(&self, dim: usize) -> String {
        match self {
            SymRe::Eps => "EPS".to_string(),
            SymRe::Sym(s) => format!("<l{}(@1, \"sym:{s}\", @1') = 1>", dim + 1),
            SymRe::Cat(a, b) => format!("({} {})", a.embedded(dim), b.embedded(dim)),
            SymRe::Alt(a, b) => format!("({} + {})", a.embedded(dim), b.embedded(dim)),
            SymRe::Star(a) => format!("({})*", a.embedded(dim)),
        }
    }
}

/// A weighted automaton over `{x, y}` with weights in `{-1, 0, 1}`; with
/// `acyclic` every transition goes from a lower to a higher state.
pub fn weighted_automaton(r: &mut ChaCha8Rng, acyclic: bool) -> WeightedAutomaton {
    let m = r.gen_range(2..=4);
    let states: Vec<String> = (0..m).map(|i| format!("q{i}")).collect();
    let mut transitions = Vec::new();
    for _ in 0..r.gen_range(2..=7) {
        let (i, j) = if acyclic {
            let i = r.gen_range(0..m - 1);
            (i, r.gen_range(i + 1..m))
        } else {
            (r.gen_range(0..m), r.gen_range(0..m))
        };
        transitions.push((
            states[i].clone(),
            ["x", "y"][r.gen_range(0..2)].to_string(),
            r.gen_range(-1..=1),
            states[j].clone(),
        ));
    }
    let finals: Vec<String> = states.iter().filter(|_| r.gen_bool(0.5)).cloned().collect();
    WeightedAutomaton {
        initial: vec![states[0].clone()],
        finals: if finals.is_empty() { vec![states[m - 1].clone()] } else { finals },
        states,
        transitions,
    }
}
