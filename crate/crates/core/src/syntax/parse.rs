use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;

use crate::program::{Atom, Program, Rule, APPEND_NAMES};
use crate::term::{Symbol, Term, Var};
use crate::theory::{Builtin, LinExpr, Rel, TheoryError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: non-linear arithmetic: {msg}")]
    NonLinear { line: usize, col: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Var(String),
    Name(String),
    Int(BigInt),
    Punct(&'static str),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const PUNCTS: [&str; 20] = [
    "<=>", "=:=", "=\\=", ":=", "=<", ">=", "(", ")", "[", "]", ",", "|", ".", "<", ">", "=", "+",
    "-", "*", ":",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError::Syntax { line, col, msg };
    macro_rules! advance {
        ($n:expr) => {{
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance!(1);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                advance!(1);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            advance!(2);
            loop {
                if i + 1 >= chars.len() {
                    return Err(err(l0, c0, "unterminated comment".into()));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    advance!(2);
                    break;
                }
                advance!(1);
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance!(1);
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Int(s.parse().expect("digits")), line: l0, col: c0 });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                advance!(1);
            }
            let upper = c.is_uppercase() || c == '_';
            if upper {
                while i < chars.len() && chars[i] == '\'' {
                    advance!(1);
                }
            }
            let s: String = chars[start..i].iter().collect();
            let tok = if upper { Tok::Var(s) } else { Tok::Name(s) };
            out.push(Token { tok, line: l0, col: c0 });
            continue;
        }
        if c == '\'' {
            advance!(1);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(err(l0, c0, "unterminated quoted atom".into())),
                    Some('\'') => {
                        advance!(1);
                        break;
                    }
                    Some('\\') if i + 1 < chars.len() => {
                        s.push(chars[i + 1]);
                        advance!(2);
                    }
                    Some(&ch) => {
                        s.push(ch);
                        advance!(1);
                    }
                }
            }
            out.push(Token { tok: Tok::Name(s), line: l0, col: c0 });
            continue;
        }
        let rest: String = chars[i..(i + 3).min(chars.len())].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                out.push(Token { tok: Tok::Punct(p), line: l0, col: c0 });
                advance!(p.chars().count());
            }
            None => return Err(err(l0, c0, format!("unexpected character '{c}'"))),
        }
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

/// A parsed query with its variable names.
#[derive(Clone, Debug)]
pub struct Query {
    pub goal: Vec<Atom>,
    pub names: BTreeMap<Var, String>,
}

impl Query {
    pub fn vars(&self) -> Vec<Var> {
        self.names.keys().copied().collect()
    }

    pub fn var_named(&self, name: &str) -> Option<Var> {
        self.names.iter().find(|(_, n)| n.as_str() == name).map(|(v, _)| *v)
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: HashMap<String, Var>,
    names: BTreeMap<Var, String>,
    next_var: u32,
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            vars: HashMap::new(),
            names: BTreeMap::new(),
            next_var: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, msg: msg.into() })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn expect(&mut self, p: &str) -> Result<(), ParseError> {
        if self.is_punct(p) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected '{p}', found {}", describe(self.peek())))
        }
    }

    fn reset_vars(&mut self) {
        self.vars.clear();
        self.names.clear();
        self.next_var = 0;
    }

    fn var(&mut self, name: &str) -> Var {
        if name == "_" {
            let v = Var(self.next_var);
            self.next_var += 1;
            return v;
        }
        if let Some(v) = self.vars.get(name) {
            return *v;
        }
        let v = Var(self.next_var);
        self.next_var += 1;
        self.vars.insert(name.to_string(), v);
        self.names.insert(v, name.to_string());
        v
    }

    // expr := mul { (+|-) mul }
    fn expr(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.mul()?;
        loop {
            let op = if self.is_punct("+") {
                "+"
            } else if self.is_punct("-") {
                "-"
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.mul()?;
            lhs = Term::app(op, vec![lhs, rhs]);
        }
    }

    fn mul(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.unary()?;
        while self.is_punct("*") {
            self.bump();
            let rhs = self.unary()?;
            lhs = Term::app("*", vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        if self.is_punct("-") {
            self.bump();
            if let Tok::Int(i) = self.peek().clone() {
                self.bump();
                return Ok(Term::Int(-i));
            }
            let t = self.unary()?;
            return Ok(Term::app("-", vec![t]));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Term::Int(i))
            }
            Tok::Var(name) => {
                self.bump();
                Ok(Term::Var(self.var(&name)))
            }
            Tok::Name(name) => {
                self.bump();
                if self.is_punct("(") {
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while self.is_punct(",") {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(")")?;
                    Ok(Term::app(name.as_str(), args))
                } else {
                    Ok(Term::atom(&name))
                }
            }
            Tok::Punct("[") => {
                self.bump();
                if self.is_punct("]") {
                    self.bump();
                    return Ok(Term::Nil);
                }
                let mut elems = vec![self.expr()?];
                while self.is_punct(",") {
                    self.bump();
                    elems.push(self.expr()?);
                }
                let tail = if self.is_punct("|") {
                    self.bump();
                    self.expr()?
                } else {
                    Term::Nil
                };
                self.expect("]")?;
                Ok(Term::list_with_tail(elems, tail))
            }
            Tok::Punct("(") => {
                self.bump();
                let t = self.expr()?;
                self.expect(")")?;
                Ok(t)
            }
            other => self.error(format!("expected a term, found {}", describe(&other))),
        }
    }

    fn nonlinear(&self, at: (usize, usize), e: TheoryError) -> ParseError {
        let msg = match e {
            TheoryError::NonLinear(m) | TheoryError::Unbound(m) => m,
        };
        ParseError::NonLinear { line: at.0, col: at.1, msg }
    }

    /// Rejects products of non-constants anywhere inside arithmetic terms.
    fn check_arith(&self, t: &Term, at: (usize, usize)) -> Result<(), ParseError> {
        if t.is_arith() {
            if let Err(e) = LinExpr::from_term(t) {
                if matches!(e, TheoryError::NonLinear(ref m) if m.starts_with("product")) {
                    return Err(self.nonlinear(at, e));
                }
            }
        }
        if let Some((_, args)) = t.as_app() {
            for a in args {
                self.check_arith(a, at)?;
            }
        } else if t.as_cons().is_some() {
            let (elems, tail) = t.list_parts();
            for e in elems {
                self.check_arith(e, at)?;
            }
            self.check_arith(tail, at)?;
        }
        Ok(())
    }

    fn goal(&mut self) -> Result<Atom, ParseError> {
        let at = self.here();
        let lhs = self.expr()?;
        let rel = match self.peek() {
            Tok::Punct("=") => Some("="),
            Tok::Punct("<") => Some("<"),
            Tok::Punct(">") => Some(">"),
            Tok::Punct("=<") => Some("=<"),
            Tok::Punct(">=") => Some(">="),
            Tok::Punct("=:=") => Some("=:="),
            Tok::Punct("=\\=") => Some("=\\="),
            Tok::Punct(":=") => Some(":="),
            Tok::Name(n) if n == "is" => Some("is"),
            _ => None,
        };
        let Some(rel) = rel else {
            self.check_arith(&lhs, at)?;
            return self.callable(lhs);
        };
        self.bump();
        let rhs = self.expr()?;
        self.check_arith(&lhs, at)?;
        self.check_arith(&rhs, at)?;
        let cmp = |rel: Rel| Builtin::cmp_terms(rel, &lhs, &rhs).map_err(|e| self.nonlinear(at, e));
        let b = match rel {
            "=" => Builtin::TermEq(lhs.clone(), rhs.clone()),
            "<" => cmp(Rel::Lt)?,
            ">" => cmp(Rel::Gt)?,
            "=<" => cmp(Rel::Le)?,
            ">=" => cmp(Rel::Ge)?,
            "=:=" => cmp(Rel::Eq)?,
            "=\\=" => cmp(Rel::Ne)?,
            _ => {
                let Term::Var(v) = lhs else {
                    return Err(ParseError::Syntax {
                        line: at.0,
                        col: at.1,
                        msg: "assignment target must be a variable".into(),
                    });
                };
                Builtin::Assign(v, LinExpr::from_term(&rhs).map_err(|e| self.nonlinear(at, e))?)
            }
        };
        Ok(Atom::Builtin(b))
    }

    fn callable(&self, t: Term) -> Result<Atom, ParseError> {
        match t.as_app() {
            Some((f, args)) if !t.is_arith() => {
                if args.is_empty() && f.as_str() == "true" {
                    return Ok(Atom::Builtin(Builtin::True));
                }
                if args.is_empty() && f.as_str() == "false" {
                    return Ok(Atom::Builtin(Builtin::False));
                }
                if args.len() == 3 && APPEND_NAMES.contains(&f.as_str()) {
                    return Ok(Atom::Append {
                        name: f.clone(),
                        args: [args[0].clone(), args[1].clone(), args[2].clone()],
                    });
                }
                Ok(Atom::Call(t))
            }
            _ => self.error(format!("'{t}' is not a goal")),
        }
    }

    fn goals(&mut self) -> Result<Vec<Atom>, ParseError> {
        let mut out = vec![self.goal()?];
        while self.is_punct(",") {
            self.bump();
            out.push(self.goal()?);
        }
        Ok(out)
    }

    fn rule(&mut self, index: usize) -> Result<Rule, ParseError> {
        self.reset_vars();
        let mut name = None;
        if let (Tok::Name(n), Tok::Punct(":")) = (self.peek().clone(), self.peek_at(1).clone()) {
            name = Some(n);
            self.bump();
            self.bump();
        }
        let at = self.here();
        let head = self.expr()?;
        if head.as_app().is_none() || head.is_arith() {
            return Err(ParseError::Syntax {
                line: at.0,
                col: at.1,
                msg: format!("rule head '{head}' is not a constraint"),
            });
        }
        self.check_arith(&head, at)?;
        self.expect("<=>")?;
        let first = self.goals()?;
        let (guard, body) = if self.is_punct("|") {
            self.bump();
            let mut guard = Vec::new();
            for a in first {
                match a {
                    Atom::Builtin(b) => guard.push(b),
                    other => {
                        return Err(ParseError::Syntax {
                            line: at.0,
                            col: at.1,
                            msg: format!("guard atom '{other}' is not a built-in"),
                        })
                    }
                }
            }
            (guard, self.goals()?)
        } else {
            (Vec::new(), first)
        };
        self.expect(".")?;
        let body = body
            .into_iter()
            .filter(|a| !matches!(a, Atom::Builtin(Builtin::True)))
            .collect();
        let guard = guard.into_iter().filter(|g| *g != Builtin::True).collect();
        let name = name.unwrap_or_else(|| format!("rule{index}"));
        Ok(Rule {
            name: Symbol::new(&name),
            head,
            guard,
            body,
            names: self.names.clone(),
        })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Var(v) => format!("variable {v}"),
        Tok::Name(n) => format!("'{n}'"),
        Tok::Int(i) => format!("{i}"),
        Tok::Punct(p) => format!("'{p}'"),
        Tok::End => "end of input".into(),
    }
}

/// Parses a program. Unnamed rules are called `rule1`, `rule2`, … by
/// position.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(src)?;
    let mut rules = Vec::new();
    while *p.peek() != Tok::End {
        let r = p.rule(rules.len() + 1)?;
        rules.push(r);
    }
    Ok(Program::new(rules))
}

pub fn parse_rule(src: &str) -> Result<Rule, ParseError> {
    let mut p = Parser::new(src)?;
    let r = p.rule(1)?;
    if *p.peek() != Tok::End {
        return p.error("trailing input after rule");
    }
    Ok(r)
}

/// Parses a goal such as `sum(9,R)`; a final `.` is optional. Variables are
/// numbered from `first_var`.
pub fn parse_query_from(src: &str, first_var: u32) -> Result<Query, ParseError> {
    let mut p = Parser::new(src)?;
    p.next_var = first_var;
    let goal = p.goals()?;
    if p.is_punct(".") {
        p.bump();
    }
    if *p.peek() != Tok::End {
        return p.error(format!("unexpected {}", describe(p.peek())));
    }
    Ok(Query {
        goal,
        names: p.names.clone(),
    })
}

pub fn parse_query(src: &str) -> Result<Query, ParseError> {
    parse_query_from(src, 0)
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.expr()?;
    if *p.peek() != Tok::End {
        return p.error(format!("unexpected {}", describe(p.peek())));
    }
    Ok(t)
}
