//! Abstract syntax for PRA queries, ontologies and terms.
//!
//! Node constants written as quoted names (`"S"`) are kept verbatim, quotes
//! included, wherever a node variable may appear; [`is_node_const`] tells
//! them apart from variables.

use crate::graph::ExtInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Le,
    Lt,
    Eq,
}

/// Argument of a labelling application.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Arg {
    /// `@i` (current) or `@i'` (next), 1-based.
    Pos { index: usize, next: bool },
    /// A node variable (only meaningful inside terms).
    Var(String),
    /// A quoted node name, stored without quotes.
    Node(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    Const(i64),
    Lab { name: String, args: Vec<Arg> },
}

/// `lhs op rhs` over the current and next nodes of the constrained paths.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeConstraint {
    pub lhs: Atom,
    pub op: Cmp,
    pub rhs: Atom,
}

impl NodeConstraint {
    /// The always-true letter.
    pub fn top() -> Self {
        NodeConstraint {
            lhs: Atom::Const(0),
            op: Cmp::Eq,
            rhs: Atom::Const(0),
        }
    }

    pub fn is_top(&self) -> bool {
        *self == Self::top()
    }

    pub fn atoms(&self) -> [&Atom; 2] {
        [&self.lhs, &self.rhs]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Regex {
    Letter(NodeConstraint),
    Concat(Box<Regex>, Box<Regex>),
    Union(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
    Eps,
}

impl Regex {
    pub fn concat(a: Regex, b: Regex) -> Regex {
        Regex::Concat(Box::new(a), Box::new(b))
    }

    pub fn union(a: Regex, b: Regex) -> Regex {
        Regex::Union(Box::new(a), Box::new(b))
    }

    /// Star with the normalizations `EPS* = EPS` and `(r*)* = r*`.
    pub fn star(a: Regex) -> Regex {
        match a {
            Regex::Eps => Regex::Eps,
            s @ Regex::Star(_) => s,
            other => Regex::Star(Box::new(other)),
        }
    }

    pub fn letter(nc: NodeConstraint) -> Regex {
        Regex::Letter(nc)
    }

    /// Number of syntax-tree nodes.
    pub fn size(&self) -> usize {
        match self {
            Regex::Letter(_) | Regex::Eps => 1,
            Regex::Concat(a, b) | Regex::Union(a, b) => 1 + a.size() + b.size(),
            Regex::Star(a) => 1 + a.size(),
        }
    }

    pub fn letters(&self) -> Vec<&NodeConstraint> {
        let mut out = Vec::new();
        self.collect_letters(&mut out);
        out
    }

    fn collect_letters<'a>(&'a self, out: &mut Vec<&'a NodeConstraint>) {
        match self {
            Regex::Letter(nc) => out.push(nc),
            Regex::Eps => {}
            Regex::Concat(a, b) | Regex::Union(a, b) => {
                a.collect_letters(out);
                b.collect_letters(out);
            }
            Regex::Star(a) => a.collect_letters(out),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegularConstraint {
    pub regex: Regex,
    pub paths: Vec<String>,
}

/// `source -path-> target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathConstraint {
    pub source: String,
    pub path: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinTerm {
    pub coef: i64,
    pub label: String,
    pub paths: Vec<String>,
}

/// `sum(coef * label[paths]) <= bound`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArithConstraint {
    pub terms: Vec<LinTerm>,
    pub bound: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PraQuery {
    pub match_nodes: Vec<String>,
    pub match_paths: Vec<String>,
    pub path_constraints: Vec<PathConstraint>,
    pub regular: Vec<RegularConstraint>,
    pub arith: Vec<ArithConstraint>,
}

pub fn is_node_const(name: &str) -> bool {
    name.starts_with('"')
}

/// Strips the quotes of a node constant.
pub fn node_const_name(name: &str) -> &str {
    name.trim_matches('"')
}

fn push_unique(out: &mut Vec<String>, name: &str) {
    if !out.iter().any(|n| n == name) {
        out.push(name.to_string());
    }
}

impl PraQuery {
    /// Free path variables followed by existential ones in order of first
    /// appearance.
    pub fn path_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        for p in &self.match_paths {
            push_unique(&mut out, p);
        }
        for pc in &self.path_constraints {
            push_unique(&mut out, &pc.path);
        }
        for rc in &self.regular {
            for p in &rc.paths {
                push_unique(&mut out, p);
            }
        }
        for ac in &self.arith {
            for t in &ac.terms {
                for p in &t.paths {
                    push_unique(&mut out, p);
                }
            }
        }
        out
    }

    /// Free node variables followed by existential ones; node constants are
    /// excluded.
    pub fn node_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        for x in &self.match_nodes {
            push_unique(&mut out, x);
        }
        for pc in &self.path_constraints {
            for x in [&pc.source, &pc.target] {
                if !is_node_const(x) {
                    push_unique(&mut out, x);
                }
            }
        }
        out
    }

    /// Node constants used as path endpoints, quotes included.
    pub fn node_consts(&self) -> Vec<String> {
        let mut out = Vec::new();
        for pc in &self.path_constraints {
            for x in [&pc.source, &pc.target] {
                if is_node_const(x) {
                    push_unique(&mut out, x);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Max,
    Min,
    Count,
    Sum,
    Plus,
    Minus,
    Times,
    Le,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Max,
        Func::Min,
        Func::Count,
        Func::Sum,
        Func::Plus,
        Func::Minus,
        Func::Times,
        Func::Le,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Max => "Max",
            Func::Min => "Min",
            Func::Count => "Count",
            Func::Sum => "Sum",
            Func::Plus => "Plus",
            Func::Minus => "Minus",
            Func::Times => "Times",
            Func::Le => "Le",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn is_aggregate(self) -> bool {
        matches!(self, Func::Max | Func::Min | Func::Count | Func::Sum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extremum {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(ExtInt),
    Lab {
        name: String,
        args: Vec<Arg>,
    },
    /// `[ Q ]`: 1 if the query has an answer with its free node variables
    /// taken from the instantiation.
    Indicator(Box<PraQuery>),
    /// `min[label, path]{ Q }` or `max[label, path]{ Q }`.
    PathExtremum {
        kind: Extremum,
        label: String,
        path: String,
        query: Box<PraQuery>,
    },
    VarEq(String, String),
    Apply(Func, Vec<Term>),
    /// `agg f { value : filter }`, collecting over `var`.
    Aggregate {
        func: Func,
        var: String,
        value: Box<Term>,
        filter: Box<Term>,
    },
}

impl Term {
    pub fn apply(f: Func, args: Vec<Term>) -> Term {
        Term::Apply(f, args)
    }

    pub fn int(v: i64) -> Term {
        Term::Const(ExtInt::Fin(v))
    }

    /// Node variables occurring free, in order of first appearance.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let add = |name: &str, bound: &Vec<String>, out: &mut Vec<String>| {
            if !bound.iter().any(|b| b == name) {
                push_unique(out, name);
            }
        };
        match self {
            Term::Const(_) => {}
            Term::Lab { args, .. } => {
                for a in args {
                    if let Arg::Var(v) = a {
                        add(v, bound, out);
                    }
                }
            }
            Term::Indicator(q) | Term::PathExtremum { query: q, .. } => {
                for x in &q.match_nodes {
                    add(x, bound, out);
                }
            }
            Term::VarEq(a, b) => {
                add(a, bound, out);
                add(b, bound, out);
            }
            Term::Apply(_, args) => {
                for t in args {
                    t.collect_free(bound, out);
                }
            }
            Term::Aggregate {
                var, value, filter, ..
            } => {
                bound.push(var.clone());
                value.collect_free(bound, out);
                filter.collect_free(bound, out);
                bound.pop();
            }
        }
    }
}

/// `name(params) := body`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Definition {
    pub name: String,
    pub params: Vec<String>,
    pub body: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct OpraQuery {
    pub ontology: Vec<Definition>,
    pub query: PraQuery,
}
