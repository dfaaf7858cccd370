//! Static checks of a parsed query against a graph schema.

use thiserror::Error;

use super::ast::*;
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("unknown labelling `{0}`")]
    UnknownLabelling(String),

    #[error("labelling `{name}` has arity {expected}, applied to {found} arguments")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("position variable @{index} out of range for a constraint over {k} paths")]
    PositionVarOutOfRange { index: usize, k: usize },

    #[error("position variable @{index} used outside a regular constraint (in `{context}`)")]
    PositionVarOutsideRegex { index: usize, context: String },

    #[error("`{name}` refers to `{referenced}`, which is defined later or is itself")]
    ForwardOntologyReference { name: String, referenced: String },

    #[error("labelling `{0}` is defined twice")]
    DuplicateLabelling(String),

    #[error("`{0}` is a reserved function name")]
    ReservedName(String),

    #[error("labelling `{0}` needs at least one parameter")]
    ZeroArity(String),

    #[error("variable `{var}` is not bound in `{context}`")]
    UnboundVariable { var: String, context: String },

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("extremum target: {0}")]
    InvalidExtremum(String),
}

type VResult = Result<(), ValidationError>;

struct Ctx<'a> {
    graph: &'a Graph,
    defs: &'a [Definition],
    /// Definitions `0..visible` may be referenced.
    visible: usize,
    /// Name of the definition being checked, for error messages.
    current: &'a str,
}

impl Ctx<'_> {
    fn arity_of(&self, name: &str) -> Result<usize, ValidationError> {
        if let Some(l) = self.graph.labelling(name) {
            return Ok(l.arity());
        }
        match self.defs.iter().position(|d| d.name == name) {
            Some(i) if i < self.visible => Ok(self.defs[i].params.len()),
            Some(_) => Err(ValidationError::ForwardOntologyReference {
                name: self.current.to_string(),
                referenced: name.to_string(),
            }),
            None => Err(ValidationError::UnknownLabelling(name.to_string())),
        }
    }

    fn check_arity(&self, name: &str, found: usize) -> VResult {
        let expected = self.arity_of(name)?;
        if expected != found {
            return Err(ValidationError::ArityMismatch {
                name: name.to_string(),
                expected,
                found,
            });
        }
        Ok(())
    }

    fn check_node(&self, name: &str) -> VResult {
        match self.graph.node(name) {
            Some(n) if !n.is_sink() => Ok(()),
            _ => Err(ValidationError::UnknownNode(name.to_string())),
        }
    }

    fn pra(&self, q: &PraQuery) -> VResult {
        for pc in &q.path_constraints {
            for e in [&pc.source, &pc.target] {
                if is_node_const(e) {
                    self.check_node(node_const_name(e))?;
                }
            }
        }
        for rc in &q.regular {
            let k = rc.paths.len();
            for nc in rc.regex.letters() {
                for atom in nc.atoms() {
                    if let Atom::Lab { name, args } = atom {
                        self.check_arity(name, args.len())?;
                        for a in args {
                            match a {
                                Arg::Pos { index, .. } if *index > k => {
                                    return Err(ValidationError::PositionVarOutOfRange { index: *index, k })
                                }
                                Arg::Pos { .. } => {}
                                Arg::Node(n) => self.check_node(n)?,
                                Arg::Var(v) => {
                                    return Err(ValidationError::UnboundVariable {
                                        var: v.clone(),
                                        context: "node constraint".to_string(),
                                    })
                                }
                            }
                        }
                    }
                }
            }
        }
        for ac in &q.arith {
            for t in &ac.terms {
                self.check_arity(&t.label, t.paths.len())?;
            }
        }
        Ok(())
    }

    fn term(&self, t: &Term, scope: &mut Vec<String>) -> VResult {
        let bound = |v: &str, scope: &Vec<String>| -> VResult {
            if scope.iter().any(|s| s == v) {
                Ok(())
            } else {
                Err(ValidationError::UnboundVariable {
                    var: v.to_string(),
                    context: self.current.to_string(),
                })
            }
        };
        match t {
            Term::Const(_) => Ok(()),
            Term::Lab { name, args } => {
                self.check_arity(name, args.len())?;
                for a in args {
                    match a {
                        Arg::Pos { index, .. } => {
                            return Err(ValidationError::PositionVarOutsideRegex {
                                index: *index,
                                context: self.current.to_string(),
                            })
                        }
                        Arg::Var(v) => bound(v, scope)?,
                        Arg::Node(n) => self.check_node(n)?,
                    }
                }
                Ok(())
            }
            Term::Indicator(q) => {
                for x in &q.match_nodes {
                    bound(x, scope)?;
                }
                self.pra(q)
            }
            Term::PathExtremum { label, path, query, .. } => {
                for x in &query.match_nodes {
                    bound(x, scope)?;
                }
                self.pra(query)?;
                let arity = self.arity_of(label)?;
                if arity != 1 {
                    return Err(ValidationError::InvalidExtremum(format!(
                        "labelling `{label}` has arity {arity}; path extrema need a unary labelling"
                    )));
                }
                if !query.path_vars().contains(path) {
                    return Err(ValidationError::InvalidExtremum(format!(
                        "path `{path}` does not occur in the nested query"
                    )));
                }
                Ok(())
            }
            Term::VarEq(a, b) => {
                bound(a, scope)?;
                bound(b, scope)
            }
            Term::Apply(_, args) => args.iter().try_for_each(|a| self.term(a, scope)),
            Term::Aggregate {
                func,
                var,
                value,
                filter,
            } => {
                if !func.is_aggregate() {
                    return Err(ValidationError::ReservedName(func.name().to_string()));
                }
                scope.push(var.clone());
                let r = self.term(value, scope).and_then(|_| self.term(filter, scope));
                scope.pop();
                r
            }
        }
    }
}

/// Checks `q` against `g`; on success returns the query unchanged, so
/// validating twice is the same as validating once.
pub fn validate(q: &OpraQuery, g: &Graph) -> Result<OpraQuery, ValidationError> {
    for (i, d) in q.ontology.iter().enumerate() {
        if Func::from_name(&d.name).is_some() {
            return Err(ValidationError::ReservedName(d.name.clone()));
        }
        if g.labelling(&d.name).is_some() || q.ontology[..i].iter().any(|e| e.name == d.name) {
            return Err(ValidationError::DuplicateLabelling(d.name.clone()));
        }
        if d.params.is_empty() {
            return Err(ValidationError::ZeroArity(d.name.clone()));
        }
        let ctx = Ctx {
            graph: g,
            defs: &q.ontology,
            visible: i,
            current: &d.name,
        };
        ctx.term(&d.body, &mut d.params.clone())?;
    }
    let ctx = Ctx {
        graph: g,
        defs: &q.ontology,
        visible: q.ontology.len(),
        current: "query",
    };
    ctx.pra(&q.query)?;
    Ok(q.clone())
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use crate::corpus;

    fn check(src: &str) -> Result<OpraQuery, ValidationError> {
        validate(&parse(src).unwrap(), &corpus::map_graph())
    }

    #[test]
    fn route_is_valid() {
        assert!(check("MATCH NODES (s, t) SUCH THAT s -p-> t WHERE <E(@1, @1') = 1>* <>(p)").is_ok());
    }

    #[test]
    fn position_out_of_range() {
        assert_eq!(
            check("MATCH PATHS (p) WHERE <time(@2) = 1>(p)"),
            Err(ValidationError::PositionVarOutOfRange { index: 2, k: 1 })
        );
    }

    #[test]
    fn unknown_labelling_in_having() {
        assert_eq!(
            check("MATCH PATHS (p) HAVING speed[p] <= 3"),
            Err(ValidationError::UnknownLabelling("speed".into()))
        );
    }

    #[test]
    fn arity_mismatch() {
        assert!(matches!(
            check("MATCH PATHS (p) HAVING E[p] <= 3"),
            Err(ValidationError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn position_outside_regex() {
        assert!(matches!(
            check("LET a(x) := time(@1) IN MATCH NODES (x)"),
            Err(ValidationError::PositionVarOutsideRegex { .. })
        ));
    }

    #[test]
    fn ontology_ordering() {
        assert!(check("LET a(x) := time(x), b(x) := a(x) + 1 IN MATCH PATHS (p) HAVING b[p] <= 3").is_ok());
        assert!(matches!(
            check("LET b(x) := a(x) + 1, a(x) := time(x) IN MATCH PATHS (p) HAVING b[p] <= 3"),
            Err(ValidationError::ForwardOntologyReference { .. })
        ));
        assert!(matches!(
            check("LET time(x) := 1 IN MATCH NODES (x)"),
            Err(ValidationError::DuplicateLabelling(_))
        ));
    }

    #[test]
    fn unknown_node_constant() {
        assert_eq!(
            check("MATCH NODES (t) SUCH THAT \"Q\" -p-> t"),
            Err(ValidationError::UnknownNode("Q".into()))
        );
    }

    #[test]
    fn idempotent() {
        let q = check("LET a(x) := time(x) IN MATCH PATHS (p) HAVING a[p] <= 3").unwrap();
        assert_eq!(validate(&q, &corpus::map_graph()).unwrap(), q);
    }
}
