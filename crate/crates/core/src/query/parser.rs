//! Recursive-descent parser with sugar removal.

use std::collections::HashMap;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;
use crate::graph::ExtInt;

const KEYWORDS: &[&str] = &[
    "LET", "IN", "MATCH", "NODES", "PATHS", "SUCH", "THAT", "WHERE", "HAVING", "AND", "OR", "NOT", "EPS",
    "def", "const", "agg", "inf", "true",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Parses a query file.
pub fn parse(text: &str) -> Result<OpraQuery, SyntaxError> {
    let mut p = Parser::new(text)?;
    p.parse_file()
}

/// Parses a bare regular expression (no definitions in scope).
pub fn parse_regex(text: &str) -> Result<Regex, SyntaxError> {
    let mut p = Parser::new(text)?;
    let r = p.regex()?;
    p.expect(Tok::Eof)?;
    Ok(r)
}

/// Parses a bare term; `scope` lists the variables bound around it.
pub fn parse_term(text: &str, scope: &[&str]) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(text)?;
    p.scope = scope.iter().map(|s| s.to_string()).collect();
    let t = p.term()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

/// Term during parsing: a bare variable is only legal as an operand of `=`
/// or `!=`.
enum PT {
    T(Term),
    Var(String, usize, usize),
}

enum LinItem {
    Const(i64),
    Lin(LinTerm),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    macros: HashMap<String, Regex>,
    consts: HashMap<String, i64>,
    scope: Vec<String>,
    nested: usize,
    fresh: usize,
    aux_defs: Vec<Definition>,
    aux_paths: Vec<(String, String)>,
}

fn one() -> Term {
    Term::int(1)
}

fn not(t: Term) -> Term {
    Term::apply(Func::Minus, vec![one(), t])
}

fn le(a: Term, b: Term) -> Term {
    Term::apply(Func::Le, vec![a, b])
}

impl Parser {
    fn new(text: &str) -> Result<Self, SyntaxError> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            macros: HashMap::new(),
            consts: HashMap::new(),
            scope: Vec::new(),
            nested: 0,
            fresh: 0,
            aux_defs: Vec::new(),
            aux_paths: Vec::new(),
        })
    }

    // ---- token helpers ----

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, off: usize) -> &Tok {
        let i = (self.pos + off).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        let (l, c) = self.here();
        Err(SyntaxError::new(l, c, msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, SyntaxError> {
        self.err(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), SyntaxError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.unexpected(&t.describe())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.advance();
                Ok(s)
            }
            _ => self.unexpected(what),
        }
    }

    fn int(&mut self) -> Result<i64, SyntaxError> {
        let neg = self.eat(&Tok::Minus);
        match self.advance() {
            Tok::Int(v) => Ok(if neg { -v } else { v }),
            _ => {
                self.pos -= 1;
                self.unexpected("an integer")
            }
        }
    }

    fn ident_list(&mut self, what: &str) -> Result<Vec<String>, SyntaxError> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            out.push(self.ident(what)?);
            if self.eat(&Tok::RParen) {
                return Ok(out);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        let n = self.fresh;
        self.fresh += 1;
        format!("__{prefix}{n}")
    }

    // ---- file level ----

    fn parse_file(&mut self) -> Result<OpraQuery, SyntaxError> {
        loop {
            if self.eat_kw("def") {
                let name = self.ident("a definition name")?;
                self.expect(Tok::Eq)?;
                let r = self.regex()?;
                self.expect(Tok::Semi)?;
                self.macros.insert(name, r);
            } else if self.eat_kw("const") {
                let name = self.ident("a constant name")?;
                self.expect(Tok::Eq)?;
                let v = self.int()?;
                self.expect(Tok::Semi)?;
                self.consts.insert(name, v);
            } else {
                break;
            }
        }
        if *self.peek() == Tok::Eof {
            return self.err("empty query");
        }
        let q = self.opra()?;
        self.eat(&Tok::Semi);
        self.expect(Tok::Eof)?;
        Ok(q)
    }

    fn opra(&mut self) -> Result<OpraQuery, SyntaxError> {
        let mut ontology = Vec::new();
        if self.eat_kw("LET") {
            loop {
                let name = self.ident("a labelling name")?;
                let params = self.ident_list("a parameter name")?;
                self.expect(Tok::Assign)?;
                self.scope = params.clone();
                let body = self.term()?;
                self.scope.clear();
                ontology.push(Definition { name, params, body });
                if self.eat_kw("IN") {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        let mut query = self.pra()?;
        ontology.append(&mut self.aux_defs);
        for (var, path) in std::mem::take(&mut self.aux_paths) {
            query.path_constraints.push(PathConstraint {
                source: var.clone(),
                path: path.clone(),
                target: var,
            });
            query.regular.push(RegularConstraint {
                regex: Regex::letter(NodeConstraint::top()),
                paths: vec![path],
            });
        }
        Ok(OpraQuery { ontology, query })
    }

    // ---- PRA queries ----

    fn pra(&mut self) -> Result<PraQuery, SyntaxError> {
        self.expect_kw("MATCH")?;
        let mut q = PraQuery::default();
        if self.eat_kw("NODES") {
            q.match_nodes = self.ident_list("a node variable")?;
            self.eat(&Tok::Comma);
        }
        if self.eat_kw("PATHS") {
            q.match_paths = self.ident_list("a path variable")?;
        }
        if self.eat_kw("SUCH") {
            self.expect_kw("THAT")?;
            loop {
                q.path_constraints.push(self.path_constraint()?);
                if !self.eat_kw("AND") {
                    break;
                }
            }
        }
        if self.eat_kw("WHERE") {
            loop {
                let regex = self.regex()?;
                let paths = self.ident_list("a path variable")?;
                if paths.is_empty() {
                    return self.err("a regular constraint needs at least one path");
                }
                q.regular.push(RegularConstraint { regex, paths });
                if !self.eat_kw("AND") {
                    break;
                }
            }
        }
        if self.eat_kw("HAVING") {
            let node_scope = q.node_vars();
            loop {
                let (lhs, op, rhs) = self.arith_cmp(&node_scope)?;
                q.arith.extend(normalize_arith(lhs, op, rhs));
                if !self.eat_kw("AND") {
                    break;
                }
            }
        }
        Ok(q)
    }

    fn endpoint(&mut self) -> Result<String, SyntaxError> {
        if let Tok::Str(s) = self.peek().clone() {
            self.advance();
            return Ok(format!("\"{s}\""));
        }
        self.ident("a node variable or quoted node name")
    }

    fn path_constraint(&mut self) -> Result<PathConstraint, SyntaxError> {
        let source = self.endpoint()?;
        self.expect(Tok::Minus)?;
        let path = self.ident("a path variable")?;
        self.expect(Tok::Arrow)?;
        let target = self.endpoint()?;
        Ok(PathConstraint { source, path, target })
    }

    // ---- arithmetical constraints ----

    /// Returns both sides as item lists and the comparison (`Le`, `Lt`,
    /// `Eq`, or their mirrored forms encoded by swapping sides).
    fn arith_cmp(&mut self, scope: &[String]) -> Result<(Vec<LinItem>, Cmp, Vec<LinItem>), SyntaxError> {
        let lhs = self.lin_expr(scope)?;
        let op = self.advance();
        let rhs = self.lin_expr(scope)?;
        Ok(match op {
            Tok::Le => (lhs, Cmp::Le, rhs),
            Tok::Lt => (lhs, Cmp::Lt, rhs),
            Tok::Eq => (lhs, Cmp::Eq, rhs),
            Tok::Ge => (rhs, Cmp::Le, lhs),
            Tok::Gt => (rhs, Cmp::Lt, lhs),
            _ => {
                self.pos -= 1;
                return self.unexpected("a comparison");
            }
        })
    }

    fn lin_expr(&mut self, scope: &[String]) -> Result<Vec<LinItem>, SyntaxError> {
        let mut items = Vec::new();
        let mut sign = if self.eat(&Tok::Minus) { -1 } else { 1 };
        loop {
            items.push(self.lin_item(sign, scope)?);
            sign = match self.peek() {
                Tok::Plus => 1,
                Tok::Minus => -1,
                _ => break,
            };
            self.advance();
            if self.eat(&Tok::Minus) {
                sign = -sign;
            }
        }
        Ok(items)
    }

    fn starts_lin_factor(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !is_keyword(s),
            Tok::LBrace | Tok::LBracket => true,
            _ => false,
        }
    }

    fn lin_item(&mut self, sign: i64, scope: &[String]) -> Result<LinItem, SyntaxError> {
        let mut coef = sign;
        if let Tok::Int(v) = *self.peek() {
            self.advance();
            coef = coef.checked_mul(v).ok_or_else(|| {
                let (l, c) = self.here();
                SyntaxError::new(l, c, "coefficient overflow")
            })?;
            if !self.eat(&Tok::Star) && !self.starts_lin_factor() {
                return Ok(LinItem::Const(coef));
            }
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if let Some(&v) = self.consts.get(&name) {
                if *self.peek_at(1) != Tok::LBracket {
                    self.advance();
                    return Ok(LinItem::Const(coef * v));
                }
            }
        }
        let is_extremum = (self.is_kw("min") || self.is_kw("max"))
            && *self.peek_at(1) == Tok::LBracket
            && *self.peek_at(5) == Tok::RBracket
            && *self.peek_at(6) == Tok::LBrace;
        match self.peek().clone() {
            Tok::Ident(name) if !is_extremum && !is_keyword(&name) => {
                self.advance();
                self.expect(Tok::LBracket)?;
                let mut paths = vec![self.ident("a path variable")?];
                while self.eat(&Tok::Comma) {
                    paths.push(self.ident("a path variable")?);
                }
                self.expect(Tok::RBracket)?;
                Ok(LinItem::Lin(LinTerm { coef, label: name, paths }))
            }
            Tok::LBrace | Tok::LBracket | Tok::Ident(_) => {
                if self.nested > 0 {
                    return self.err("terms in HAVING are only allowed in the outermost query");
                }
                let saved = std::mem::replace(&mut self.scope, scope.to_vec());
                let t = if self.eat(&Tok::LBrace) {
                    let t = self.term()?;
                    self.expect(Tok::RBrace)?;
                    t
                } else {
                    let pt = self.primary()?;
                    self.to_term(pt)?
                };
                self.scope = saved;
                Ok(LinItem::Lin(self.desugar_term_atom(coef, t)))
            }
            _ => self.unexpected("a labelling aggregate, integer or term"),
        }
    }

    /// Replaces a term inside `HAVING` by a fresh auxiliary labelling over
    /// single-node paths pinned to the term's variables.
    fn desugar_term_atom(&mut self, coef: i64, t: Term) -> LinTerm {
        let mut params = t.free_vars();
        if params.is_empty() {
            params.push(self.fresh("z"));
        }
        let label = self.fresh("h");
        let mut paths = Vec::new();
        for v in &params {
            let existing = self.aux_paths.iter().find(|(x, _)| x == v).map(|(_, p)| p.clone());
            let p = match existing {
                Some(p) => p,
                None => {
                    let p = self.fresh("r");
                    self.aux_paths.push((v.clone(), p.clone()));
                    p
                }
            };
            paths.push(p);
        }
        self.aux_defs.push(Definition {
            name: label.clone(),
            params,
            body: t,
        });
        LinTerm { coef, label, paths }
    }

    // ---- regular expressions ----

    pub(super) fn regex(&mut self) -> Result<Regex, SyntaxError> {
        let mut r = self.regex_concat()?;
        while self.eat(&Tok::Plus) {
            let rhs = self.regex_concat()?;
            r = Regex::union(r, rhs);
        }
        Ok(r)
    }

    fn starts_regex_atom(&self) -> bool {
        match self.peek() {
            Tok::Lt => true,
            Tok::LParen => !self.is_application(),
            Tok::Ident(s) => s == "EPS" || !is_keyword(s),
            _ => false,
        }
    }

    /// `( p, q )` followed by something that cannot continue a regex.
    fn is_application(&self) -> bool {
        let mut off = 0;
        if *self.peek_at(off) != Tok::LParen {
            return false;
        }
        off += 1;
        loop {
            match self.peek_at(off) {
                Tok::Ident(s) if !is_keyword(s) => off += 1,
                _ => return false,
            }
            match self.peek_at(off) {
                Tok::Comma => off += 1,
                Tok::RParen => {
                    off += 1;
                    break;
                }
                _ => return false,
            }
        }
        !matches!(
            self.peek_at(off),
            Tok::Lt | Tok::LParen | Tok::Star | Tok::Plus | Tok::Dot
        ) && !matches!(self.peek_at(off), Tok::Ident(s) if s == "EPS" || !is_keyword(s))
    }

    fn regex_concat(&mut self) -> Result<Regex, SyntaxError> {
        let mut r = self.regex_postfix()?;
        loop {
            // `.` is optional between concatenated factors
            if self.eat(&Tok::Dot) || self.starts_regex_atom() {
                let rhs = self.regex_postfix()?;
                r = Regex::concat(r, rhs);
            } else {
                return Ok(r);
            }
        }
    }

    fn regex_postfix(&mut self) -> Result<Regex, SyntaxError> {
        let mut r = self.regex_atom()?;
        while self.eat(&Tok::Star) {
            r = Regex::star(r);
        }
        Ok(r)
    }

    fn regex_atom(&mut self) -> Result<Regex, SyntaxError> {
        match self.peek().clone() {
            Tok::Lt => {
                self.advance();
                Ok(Regex::Letter(self.node_constraint()?))
            }
            Tok::LParen => {
                self.advance();
                let r = self.regex()?;
                self.expect(Tok::RParen)?;
                Ok(r)
            }
            Tok::Ident(s) if s == "EPS" => {
                self.advance();
                Ok(Regex::Eps)
            }
            Tok::Ident(s) if !is_keyword(&s) => match self.macros.get(&s) {
                Some(r) => {
                    let r = r.clone();
                    self.advance();
                    Ok(r)
                }
                None => self.err(format!("unknown regular expression `{s}`")),
            },
            _ => self.unexpected("a regular expression"),
        }
    }

    /// After the opening `<`.
    fn node_constraint(&mut self) -> Result<NodeConstraint, SyntaxError> {
        if self.eat(&Tok::Gt) {
            return Ok(NodeConstraint::top());
        }
        if self.is_kw("true") && *self.peek_at(1) == Tok::Gt {
            self.advance();
            self.advance();
            return Ok(NodeConstraint::top());
        }
        let lhs = self.nc_atom()?;
        let op = self.advance();
        let rhs = self.nc_atom()?;
        self.expect(Tok::Gt)?;
        let nc = |lhs, op, rhs| NodeConstraint { lhs, op, rhs };
        match op {
            Tok::Le => Ok(nc(lhs, Cmp::Le, rhs)),
            Tok::Lt => Ok(nc(lhs, Cmp::Lt, rhs)),
            Tok::Eq => Ok(nc(lhs, Cmp::Eq, rhs)),
            Tok::Ge => Ok(nc(rhs, Cmp::Le, lhs)),
            Tok::Gt => Ok(nc(rhs, Cmp::Lt, lhs)),
            _ => {
                self.pos -= 2;
                self.unexpected("a comparison")
            }
        }
    }

    fn nc_atom(&mut self) -> Result<Atom, SyntaxError> {
        match self.peek().clone() {
            Tok::Int(_) | Tok::Minus => Ok(Atom::Const(self.int()?)),
            Tok::Ident(name) if !is_keyword(&name) => {
                self.advance();
                if *self.peek() == Tok::LParen {
                    let args = self.args()?;
                    Ok(Atom::Lab { name, args })
                } else if let Some(&v) = self.consts.get(&name) {
                    Ok(Atom::Const(v))
                } else {
                    self.pos -= 1;
                    self.err(format!("unknown constant `{name}`"))
                }
            }
            _ => self.unexpected("an integer or labelling application"),
        }
    }

    fn args(&mut self) -> Result<Vec<Arg>, SyntaxError> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            let a = match self.advance() {
                Tok::Pos { index, next } => Arg::Pos { index, next },
                Tok::Str(s) => Arg::Node(s),
                Tok::Ident(s) if !is_keyword(&s) => Arg::Var(s),
                _ => {
                    self.pos -= 1;
                    return self.unexpected("an argument");
                }
            };
            out.push(a);
            if self.eat(&Tok::RParen) {
                return Ok(out);
            }
            self.expect(Tok::Comma)?;
        }
    }

    // ---- terms ----

    fn to_term(&self, pt: PT) -> Result<Term, SyntaxError> {
        match pt {
            PT::T(t) => Ok(t),
            PT::Var(v, l, c) => Err(SyntaxError::new(
                l,
                c,
                format!("variable `{v}` can only be compared with `=` or `!=` to another variable"),
            )),
        }
    }

    pub(super) fn term(&mut self) -> Result<Term, SyntaxError> {
        let pt = self.t_implies()?;
        self.to_term(pt)
    }

    fn t_implies(&mut self) -> Result<PT, SyntaxError> {
        let a = self.t_or()?;
        if self.eat(&Tok::Implies) {
            let a = self.to_term(a)?;
            let b = self.t_implies()?;
            let b = self.to_term(b)?;
            return Ok(PT::T(Term::apply(Func::Max, vec![not(a), b])));
        }
        Ok(a)
    }

    fn t_or(&mut self) -> Result<PT, SyntaxError> {
        let mut a = self.t_and()?;
        while self.eat_kw("OR") {
            let l = self.to_term(a)?;
            let r = self.t_and()?;
            let r = self.to_term(r)?;
            a = PT::T(Term::apply(Func::Max, vec![l, r]));
        }
        Ok(a)
    }

    fn t_and(&mut self) -> Result<PT, SyntaxError> {
        let mut a = self.t_not()?;
        while self.eat_kw("AND") {
            let l = self.to_term(a)?;
            let r = self.t_not()?;
            let r = self.to_term(r)?;
            a = PT::T(Term::apply(Func::Times, vec![l, r]));
        }
        Ok(a)
    }

    fn t_not(&mut self) -> Result<PT, SyntaxError> {
        if self.eat_kw("NOT") {
            let a = self.t_not()?;
            return Ok(PT::T(not(self.to_term(a)?)));
        }
        self.t_cmp()
    }

    fn t_cmp(&mut self) -> Result<PT, SyntaxError> {
        let a = self.t_add()?;
        let op = match self.peek() {
            Tok::Le | Tok::Lt | Tok::Ge | Tok::Gt | Tok::Eq | Tok::Ne => self.advance(),
            _ => return Ok(a),
        };
        let b = self.t_add()?;
        if let (PT::Var(x, ..), PT::Var(y, ..)) = (&a, &b) {
            match op {
                Tok::Eq => return Ok(PT::T(Term::VarEq(x.clone(), y.clone()))),
                Tok::Ne => return Ok(PT::T(not(Term::VarEq(x.clone(), y.clone())))),
                _ => {}
            }
        }
        let a = self.to_term(a)?;
        let b = self.to_term(b)?;
        let eq = |a: Term, b: Term| Term::apply(Func::Times, vec![le(a.clone(), b.clone()), le(b, a)]);
        Ok(PT::T(match op {
            Tok::Le => le(a, b),
            Tok::Ge => le(b, a),
            Tok::Lt => not(le(b, a)),
            Tok::Gt => not(le(a, b)),
            Tok::Eq => eq(a, b),
            _ => not(eq(a, b)),
        }))
    }

    fn t_add(&mut self) -> Result<PT, SyntaxError> {
        let mut a = self.t_mul()?;
        loop {
            let f = match self.peek() {
                Tok::Plus => Func::Plus,
                Tok::Minus => Func::Minus,
                _ => return Ok(a),
            };
            self.advance();
            let l = self.to_term(a)?;
            let r = self.t_mul()?;
            let r = self.to_term(r)?;
            a = PT::T(Term::apply(f, vec![l, r]));
        }
    }

    fn t_mul(&mut self) -> Result<PT, SyntaxError> {
        let mut a = self.t_unary()?;
        while self.eat(&Tok::Star) {
            let l = self.to_term(a)?;
            let r = self.t_unary()?;
            let r = self.to_term(r)?;
            a = PT::T(Term::apply(Func::Times, vec![l, r]));
        }
        Ok(a)
    }

    fn t_unary(&mut self) -> Result<PT, SyntaxError> {
        if self.eat(&Tok::Minus) {
            match self.peek().clone() {
                Tok::Int(v) => {
                    self.advance();
                    return Ok(PT::T(Term::int(-v)));
                }
                Tok::Ident(s) if s == "inf" => {
                    self.advance();
                    return Ok(PT::T(Term::Const(ExtInt::NegInf)));
                }
                _ => {
                    let a = self.t_unary()?;
                    let a = self.to_term(a)?;
                    return Ok(PT::T(Term::apply(Func::Minus, vec![Term::int(0), a])));
                }
            }
        }
        self.primary()
    }

    fn nested_query(&mut self) -> Result<PraQuery, SyntaxError> {
        self.nested += 1;
        let saved = std::mem::take(&mut self.scope);
        let q = self.pra();
        self.scope = saved;
        self.nested -= 1;
        q
    }

    fn primary(&mut self) -> Result<PT, SyntaxError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(PT::T(Term::int(v)))
            }
            Tok::LParen => {
                self.advance();
                let t = self.t_implies()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBracket => {
                self.advance();
                let q = self.nested_query()?;
                self.expect(Tok::RBracket)?;
                Ok(PT::T(Term::Indicator(Box::new(q))))
            }
            Tok::Ident(s) if s == "inf" => {
                self.advance();
                Ok(PT::T(Term::Const(ExtInt::PosInf)))
            }
            Tok::Ident(s) if s == "agg" => {
                self.advance();
                let fname = self.ident("an aggregate function")?;
                self.aggregate(&fname, line, col)
            }
            Tok::Ident(s) if (s == "min" || s == "max") && *self.peek_at(1) == Tok::LBracket => {
                self.advance();
                self.advance();
                let label = self.ident("a labelling name")?;
                self.expect(Tok::Comma)?;
                let path = self.ident("a path variable")?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::LBrace)?;
                let q = self.nested_query()?;
                self.expect(Tok::RBrace)?;
                let kind = if s == "min" { Extremum::Min } else { Extremum::Max };
                Ok(PT::T(Term::PathExtremum {
                    kind,
                    label,
                    path,
                    query: Box::new(q),
                }))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.advance();
                if let Some(f) = Func::from_name(&s) {
                    if matches!(self.peek(), Tok::LBrace | Tok::Ident(_)) {
                        return self.aggregate(&s, line, col);
                    }
                    self.expect(Tok::LParen)?;
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.term()?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(Tok::Comma)?;
                        }
                    }
                    return Ok(PT::T(Term::Apply(f, args)));
                }
                if *self.peek() == Tok::LParen {
                    let args = self.args()?;
                    return Ok(PT::T(Term::Lab { name: s, args }));
                }
                if let Some(&v) = self.consts.get(&s) {
                    return Ok(PT::T(Term::int(v)));
                }
                Ok(PT::Var(s, line, col))
            }
            _ => self.unexpected("a term"),
        }
    }

    /// After the function name: `[var] { value : filter }`.
    fn aggregate(&mut self, fname: &str, line: usize, col: usize) -> Result<PT, SyntaxError> {
        let func = match Func::from_name(fname) {
            Some(f) if f.is_aggregate() => f,
            _ => return Err(SyntaxError::new(line, col, format!("`{fname}` is not an aggregate function"))),
        };
        let explicit = if let Tok::Ident(_) = self.peek() {
            Some(self.ident("a collector variable")?)
        } else {
            None
        };
        self.expect(Tok::LBrace)?;
        if let Some(v) = &explicit {
            self.scope.push(v.clone());
        }
        let value = self.term()?;
        self.expect(Tok::Colon)?;
        let filter = self.term()?;
        self.expect(Tok::RBrace)?;
        let var = match explicit {
            Some(v) => {
                self.scope.pop();
                v
            }
            None => {
                let mut outside: Vec<String> = Vec::new();
                for v in value.free_vars().into_iter().chain(filter.free_vars()) {
                    if !self.scope.contains(&v) && !outside.contains(&v) {
                        outside.push(v);
                    }
                }
                match outside.len() {
                    1 => outside.pop().unwrap(),
                    0 => {
                        return Err(SyntaxError::new(
                            line,
                            col,
                            "aggregate has no collector variable; name it explicitly",
                        ))
                    }
                    _ => {
                        return Err(SyntaxError::new(
                            line,
                            col,
                            format!(
                                "ambiguous collector among {}; name it explicitly as `{} x {{ .. }}`",
                                outside.join(", "),
                                func.name()
                            ),
                        ))
                    }
                }
            }
        };
        Ok(PT::T(Term::Aggregate {
            func,
            var,
            value: Box::new(value),
            filter: Box::new(filter),
        }))
    }
}

/// Moves everything to the left: `lhs op rhs` becomes one or two
/// `sum <= bound` constraints.
fn normalize_arith(lhs: Vec<LinItem>, op: Cmp, rhs: Vec<LinItem>) -> Vec<ArithConstraint> {
    let mut terms = Vec::new();
    let mut bound: i64 = 0;
    for it in lhs {
        match it {
            LinItem::Const(c) => bound -= c,
            LinItem::Lin(t) => terms.push(t),
        }
    }
    for it in rhs {
        match it {
            LinItem::Const(c) => bound += c,
            LinItem::Lin(mut t) => {
                t.coef = -t.coef;
                terms.push(t);
            }
        }
    }
    let negated = || ArithConstraint {
        terms: terms
            .iter()
            .map(|t| LinTerm {
                coef: -t.coef,
                ..t.clone()
            })
            .collect(),
        bound: -bound,
    };
    match op {
        Cmp::Le => vec![ArithConstraint { terms: terms.clone(), bound }],
        Cmp::Lt => vec![ArithConstraint {
            terms: terms.clone(),
            bound: bound - 1,
        }],
        Cmp::Eq => vec![
            ArithConstraint {
                terms: terms.clone(),
                bound,
            },
            negated(),
        ],
    }
}
