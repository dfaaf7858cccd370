//! Canonical text form. Printing then parsing yields the same AST.

use std::fmt::Write;

use super::ast::*;
use crate::graph::ExtInt;

fn cmp_str(c: Cmp) -> &'static str {
    match c {
        Cmp::Le => "<=",
        Cmp::Lt => "<",
        Cmp::Eq => "=",
    }
}

fn arg_str(a: &Arg) -> String {
    match a {
        Arg::Pos { index, next } => format!("@{index}{}", if *next { "'" } else { "" }),
        Arg::Var(v) => v.clone(),
        Arg::Node(n) => format!("\"{n}\""),
    }
}

fn app_str(name: &str, args: &[Arg]) -> String {
    let a: Vec<String> = args.iter().map(arg_str).collect();
    format!("{name}({})", a.join(", "))
}

fn atom_str(a: &Atom) -> String {
    match a {
        Atom::Const(v) => v.to_string(),
        Atom::Lab { name, args } => app_str(name, args),
    }
}

pub fn print_node_constraint(nc: &NodeConstraint) -> String {
    if nc.is_top() {
        return "<>".to_string();
    }
    format!("<{} {} {}>", atom_str(&nc.lhs), cmp_str(nc.op), atom_str(&nc.rhs))
}

pub fn print_regex(r: &Regex) -> String {
    match r {
        Regex::Letter(nc) => print_node_constraint(nc),
        Regex::Eps => "EPS".to_string(),
        Regex::Union(a, b) => {
            let rhs = print_regex(b);
            let rhs = if matches!(**b, Regex::Union(..)) { format!("({rhs})") } else { rhs };
            format!("{} + {rhs}", print_regex(a))
        }
        Regex::Concat(a, b) => {
            let lhs = print_regex(a);
            let lhs = if matches!(**a, Regex::Union(..)) { format!("({lhs})") } else { lhs };
            let rhs = print_regex(b);
            let rhs = if matches!(**b, Regex::Union(..) | Regex::Concat(..)) {
                format!("({rhs})")
            } else {
                rhs
            };
            format!("{lhs} . {rhs}")
        }
        Regex::Star(a) => {
            let body = print_regex(a);
            if matches!(**a, Regex::Letter(_) | Regex::Eps) {
                format!("{body}*")
            } else {
                format!("({body})*")
            }
        }
    }
}

fn ext_str(v: ExtInt) -> String {
    match v {
        ExtInt::PosInf => "inf".to_string(),
        ExtInt::NegInf => "-inf".to_string(),
        ExtInt::Fin(v) => v.to_string(),
    }
}

pub fn print_term(t: &Term) -> String {
    match t {
        Term::Const(v) => ext_str(*v),
        Term::Lab { name, args } => app_str(name, args),
        Term::Indicator(q) => format!("[{}]", print_pra(q)),
        Term::PathExtremum {
            kind,
            label,
            path,
            query,
        } => {
            let k = match kind {
                Extremum::Min => "min",
                Extremum::Max => "max",
            };
            format!("{k}[{label}, {path}]{{ {} }}", print_pra(query))
        }
        Term::VarEq(a, b) => format!("({a} = {b})"),
        Term::Apply(f, args) => {
            let a: Vec<String> = args.iter().map(print_term).collect();
            format!("{}({})", f.name(), a.join(", "))
        }
        Term::Aggregate {
            func,
            var,
            value,
            filter,
        } => format!(
            "agg {} {var} {{ {} : {} }}",
            func.name(),
            print_term(value),
            print_term(filter)
        ),
    }
}

fn print_arith(a: &ArithConstraint) -> String {
    let mut s = String::new();
    if a.terms.is_empty() {
        s.push('0');
    }
    for (i, t) in a.terms.iter().enumerate() {
        if i > 0 {
            s.push_str(" + ");
        }
        let _ = write!(s, "{}*{}[{}]", t.coef, t.label, t.paths.join(", "));
    }
    let _ = write!(s, " <= {}", a.bound);
    s
}

pub fn print_pra(q: &PraQuery) -> String {
    let mut s = String::from("MATCH");
    if !q.match_nodes.is_empty() {
        let _ = write!(s, " NODES ({})", q.match_nodes.join(", "));
    }
    if !q.match_paths.is_empty() {
        if !q.match_nodes.is_empty() {
            s.push(',');
        }
        let _ = write!(s, " PATHS ({})", q.match_paths.join(", "));
    }
    if !q.path_constraints.is_empty() {
        let pcs: Vec<String> = q
            .path_constraints
            .iter()
            .map(|pc| format!("{} -{}-> {}", pc.source, pc.path, pc.target))
            .collect();
        let _ = write!(s, " SUCH THAT {}", pcs.join(" AND "));
    }
    if !q.regular.is_empty() {
        let rcs: Vec<String> = q
            .regular
            .iter()
            .map(|rc| format!("({})({})", print_regex(&rc.regex), rc.paths.join(", ")))
            .collect();
        let _ = write!(s, " WHERE {}", rcs.join(" AND "));
    }
    if !q.arith.is_empty() {
        let acs: Vec<String> = q.arith.iter().map(print_arith).collect();
        let _ = write!(s, " HAVING {}", acs.join(" AND "));
    }
    s
}

pub fn print_query(q: &OpraQuery) -> String {
    let mut s = String::new();
    if !q.ontology.is_empty() {
        let defs: Vec<String> = q
            .ontology
            .iter()
            .map(|d| format!("{}({}) := {}", d.name, d.params.join(", "), print_term(&d.body)))
            .collect();
        let _ = write!(s, "LET {}\nIN ", defs.join(",\n    "));
    }
    s.push_str(&print_pra(&q.query));
    s
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse, parse_regex};
    use super::*;

    #[test]
    fn regex_shapes_survive() {
        for src in ["<> . (<1 = 0> . <>)", "(<> + <1 < 2>) . <>*", "(<> . <>)*", "EPS + (<> + <>)"] {
            let r = parse_regex(src).unwrap();
            assert_eq!(parse_regex(&print_regex(&r)).unwrap(), r, "{src}");
        }
    }

    #[test]
    fn query_round_trip() {
        let src = "def route = <E(@1, @1') = 1>* <>;\n\
                   LET m(x, y) := E(x, y) AND Count { attr(z) : E(x, z) AND attr(z) >= attr(y) } = 1 IN \
                   MATCH NODES (s, t) SUCH THAT s -p-> t WHERE route(p) HAVING time[p] < 3 AND {m(s, t)} = 1";
        let q = parse(src).unwrap();
        let printed = print_query(&q);
        assert_eq!(parse(&printed).unwrap(), q, "{printed}");
    }
}
