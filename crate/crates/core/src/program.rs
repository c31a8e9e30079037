//! Rules, goals and programs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::term::{Subst, Symbol, Term, Var, VarSupply};
use crate::theory::{Builtin, LinExpr, TheoryError};

/// Names under which the interpreted list concatenation is recognized.
pub const APPEND_NAMES: [&str; 2] = ["a", "append"];

/// One goal atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    /// A user-defined constraint.
    Call(Term),
    Builtin(Builtin),
    /// `a(X,Y,Z)`: Z is X followed by Y.
    Append { name: Symbol, args: [Term; 3] },
}

impl Atom {
    pub fn call(t: Term) -> Atom {
        Atom::Call(t)
    }

    pub fn append(x: Term, y: Term, z: Term) -> Atom {
        Atom::Append {
            name: Symbol::new("a"),
            args: [x, y, z],
        }
    }

    pub fn as_call(&self) -> Option<&Term> {
        match self {
            Atom::Call(t) => Some(t),
            _ => None,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Atom::Call(t) => t.collect_vars(out),
            Atom::Builtin(b) => b.collect_vars(out),
            Atom::Append { args, .. } => args.iter().for_each(|t| t.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn apply(&self, sub: &Subst) -> Result<Atom, TheoryError> {
        Ok(match self {
            Atom::Call(t) => Atom::Call(sub.apply(t)),
            Atom::Builtin(b) => Atom::Builtin(b.apply(sub)?),
            Atom::Append { name, args } => Atom::Append {
                name: name.clone(),
                args: [sub.apply(&args[0]), sub.apply(&args[1]), sub.apply(&args[2])],
            },
        })
    }

    pub fn rename(&self, f: &mut dyn FnMut(Var) -> Var) -> Atom {
        let mut term = |t: &Term| t.map_vars(&mut |v| Some(Term::Var(f(v))));
        match self {
            Atom::Call(t) => Atom::Call(term(t)),
            Atom::Append { name, args } => Atom::Append {
                name: name.clone(),
                args: [term(&args[0]), term(&args[1]), term(&args[2])],
            },
            Atom::Builtin(b) => Atom::Builtin(b.rename(f)),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::syntax::write_atom(f, self, &|v| v.to_string(), None)
    }
}

/// `name @ head <=> guard | body.`
#[derive(Clone, Debug)]
pub struct Rule {
    pub name: Symbol,
    pub head: Term,
    pub guard: Vec<Builtin>,
    pub body: Vec<Atom>,
    /// Print-name hints for variables.
    pub names: BTreeMap<Var, String>,
}

/// Structural equality; print-name hints are ignored.
impl PartialEq for Rule {
    fn eq(&self, other: &Rule) -> bool {
        self.name == other.name
            && self.head == other.head
            && self.guard == other.guard
            && self.body == other.body
    }
}

impl Eq for Rule {}

impl Rule {
    pub fn new(name: &str, head: Term, guard: Vec<Builtin>, body: Vec<Atom>) -> Rule {
        Rule {
            name: Symbol::new(name),
            head,
            guard,
            body,
            names: BTreeMap::new(),
        }
    }

    /// Functor and arity of the head.
    pub fn key(&self) -> (Symbol, usize) {
        let (f, n) = self.head.functor().expect("rule head is a compound");
        (f.clone(), n)
    }

    pub fn symbol(&self) -> &Symbol {
        self.head.functor().expect("rule head is a compound").0
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.head.vars();
        for g in &self.guard {
            g.collect_vars(&mut out);
        }
        for a in &self.body {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn head_vars(&self) -> BTreeSet<Var> {
        self.head.vars()
    }

    pub fn guard_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for g in &self.guard {
            g.collect_vars(&mut out);
        }
        out
    }

    pub fn body_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for a in &self.body {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn max_var(&self) -> Option<Var> {
        self.vars().into_iter().next_back()
    }

    /// User calls in the body, in order.
    pub fn calls(&self) -> impl Iterator<Item = &Term> {
        self.body.iter().filter_map(Atom::as_call)
    }

    /// Body built-ins that belong to the constraint theory.
    pub fn body_builtins(&self) -> impl Iterator<Item = &Builtin> {
        self.body.iter().filter_map(|a| match a {
            Atom::Builtin(b) => Some(b),
            _ => None,
        })
    }

    pub fn name_of(&self, v: Var) -> Option<&str> {
        self.names.get(&v).map(String::as_str)
    }

    pub fn apply(&self, sub: &Subst) -> Result<Rule, TheoryError> {
        Ok(Rule {
            name: self.name.clone(),
            head: sub.apply(&self.head),
            guard: self.guard.iter().map(|g| g.apply(sub)).collect::<Result<_, _>>()?,
            body: self.body.iter().map(|a| a.apply(sub)).collect::<Result<_, _>>()?,
            names: self.names.clone(),
        })
    }

    /// Variable-to-variable renaming, carrying the name hints along.
    pub fn rename(&self, f: &mut dyn FnMut(Var) -> Var) -> Rule {
        let mut map: HashMap<Var, Var> = HashMap::new();
        let mut g = |v: Var| *map.entry(v).or_insert_with(|| f(v));
        let head = self.head.map_vars(&mut |v| Some(Term::Var(g(v))));
        let guard = self.guard.iter().map(|b| b.rename(&mut g)).collect();
        let body = self.body.iter().map(|a| a.rename(&mut g)).collect();
        // Hints for variables that no longer occur are dropped.
        let names = self
            .names
            .iter()
            .filter_map(|(v, n)| map.get(v).map(|w| (*w, n.clone())))
            .collect();
        Rule {
            name: self.name.clone(),
            head,
            guard,
            body,
            names,
        }
    }

    /// Copy with every variable fresh. Name hints gain a prime.
    pub fn rename_apart(&self, supply: &mut VarSupply) -> Rule {
        let mut r = self.rename(&mut |_| supply.fresh());
        for n in r.names.values_mut() {
            n.push('\'');
        }
        r
    }

    /// Whether the rule is `c(X1..Xn) <=> d(X1..Xn)` with distinct variables.
    pub fn is_delegation(&self) -> bool {
        if !self.guard.is_empty() || self.body.len() != 1 {
            return false;
        }
        let Some(call) = self.body[0].as_call() else {
            return false;
        };
        let (Some((_, hargs)), Some((_, cargs))) = (self.head.as_app(), call.as_app()) else {
            return false;
        };
        let distinct: BTreeSet<Var> = hargs.iter().filter_map(Term::as_var).collect();
        distinct.len() == hargs.len() && hargs == cargs
    }

    /// Renumbers variables by first occurrence so that alpha-equivalent rules
    /// compare equal. Arithmetic sub-terms are rebuilt in linear normal form.
    pub fn canonical(&self) -> Rule {
        let mut order: Vec<Var> = Vec::new();
        let mut seen = BTreeSet::new();
        let mut push = |v: Var, order: &mut Vec<Var>| {
            if seen.insert(v) {
                order.push(v);
            }
        };
        // Structural positions first; variables that only occur inside linear
        // expressions are numbered afterwards, by coefficient.
        let mut visit = |t: &Term, order: &mut Vec<Var>| {
            visit_structural(t, &mut |v| push(v, order));
        };
        visit(&self.head, &mut order);
        for g in &self.guard {
            if let Builtin::TermEq(a, b) = g {
                visit(a, &mut order);
                visit(b, &mut order);
            }
        }
        for a in &self.body {
            match a {
                Atom::Call(t) => visit(t, &mut order),
                Atom::Append { args, .. } => args.iter().for_each(|t| visit(t, &mut order)),
                Atom::Builtin(Builtin::TermEq(x, y)) => {
                    visit(x, &mut order);
                    visit(y, &mut order);
                }
                Atom::Builtin(Builtin::Assign(v, _)) => visit(&Term::Var(*v), &mut order),
                Atom::Builtin(_) => {}
            }
        }
        let mut rest: Vec<(String, Var)> = Vec::new();
        for v in self.vars() {
            if !order.contains(&v) {
                rest.push((self.arith_signature(v), v));
            }
        }
        rest.sort();
        order.extend(rest.into_iter().map(|(_, v)| v));
        let index: HashMap<Var, Var> = order
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, Var(i as u32)))
            .collect();
        let mut r = self.rename(&mut |v| index[&v]);
        r.head = linear_normal(&r.head);
        r.body = r
            .body
            .into_iter()
            .map(|a| match a {
                Atom::Call(t) => Atom::Call(linear_normal(&t)),
                Atom::Append { name, args } => Atom::Append {
                    name,
                    args: args.map(|t| linear_normal(&t)),
                },
                Atom::Builtin(Builtin::TermEq(x, y)) => {
                    Atom::Builtin(Builtin::TermEq(linear_normal(&x), linear_normal(&y)))
                }
                other => other,
            })
            .collect();
        r.guard = r
            .guard
            .into_iter()
            .map(|g| match g {
                Builtin::TermEq(x, y) => Builtin::TermEq(linear_normal(&x), linear_normal(&y)),
                other => other,
            })
            .collect();
        r
    }

    /// Coefficients with which `v` occurs in the rule's linear expressions.
    fn arith_signature(&self, v: Var) -> String {
        let mut sig = Vec::new();
        let mut note = |e: &LinExpr| {
            if let Some(c) = e.coeff(v) {
                sig.push(c.to_string());
            }
        };
        for b in self.guard.iter().chain(self.body_builtins()) {
            match b {
                Builtin::LinCmp(_, l, r) => {
                    note(l);
                    note(r);
                }
                Builtin::Assign(_, e) => note(e),
                _ => {}
            }
        }
        sig.join(",")
    }
}

/// Visits variables outside arithmetic compounds, then those inside them.
fn visit_structural(t: &Term, f: &mut dyn FnMut(Var)) {
    let mut arith: Vec<Term> = Vec::new();
    walk_structural(t, f, &mut arith);
    for a in arith {
        if let Ok(e) = LinExpr::from_term(&a) {
            for v in e.vars() {
                f(v);
            }
        } else {
            a.visit_vars(f);
        }
    }
}

fn walk_structural(t: &Term, f: &mut dyn FnMut(Var), arith: &mut Vec<Term>) {
    let mut cur = t;
    loop {
        match cur {
            Term::Var(v) => return f(*v),
            Term::Int(_) | Term::Nil => return,
            Term::App(_) if cur.is_arith() => return arith.push(cur.clone()),
            Term::App(_) => {
                let (_, args) = cur.as_app().expect("app");
                for a in args {
                    walk_structural(a, f, arith);
                }
                return;
            }
            Term::Cons(_) => {
                let (h, tl) = cur.as_cons().expect("cons");
                walk_structural(h, f, arith);
                cur = tl;
            }
        }
    }
}

/// Rebuilds arithmetic sub-terms from their linear form.
pub fn linear_normal(t: &Term) -> Term {
    if t.is_arith() {
        return match LinExpr::from_term(t) {
            Ok(e) => e.to_term(),
            Err(_) => t.clone(),
        };
    }
    match t {
        Term::App(_) if !t.is_ground() || t.as_app().is_some_and(|(_, a)| a.iter().any(Term::is_arith)) => {
            let (f, args) = t.as_app().expect("app");
            Term::app(f.clone(), args.iter().map(linear_normal).collect())
        }
        Term::Cons(_) if !t.is_ground() => {
            let (elems, tail) = t.list_parts();
            Term::list_with_tail(
                elems.into_iter().map(linear_normal).collect::<Vec<_>>(),
                linear_normal(tail),
            )
        }
        _ => t.clone(),
    }
}

/// An ordered rule sequence with a lookup index.
#[derive(Clone, Debug, Default)]
pub struct Program {
    rules: Vec<Rule>,
    index: HashMap<(Symbol, usize), Vec<usize>>,
    recursive: Vec<bool>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Program) -> bool {
        self.rules == other.rules
    }
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Program {
        let mut index: HashMap<(Symbol, usize), Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            index.entry(r.key()).or_default().push(i);
        }
        let recursive = rules.iter().map(is_recursive).collect();
        Program {
            rules,
            index,
            recursive,
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn into_rules(self) -> Vec<Rule> {
        self.rules
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name.as_str() == name)
    }

    /// Rule indices for a constraint, in textual order.
    pub fn rules_for(&self, functor: &Symbol, arity: usize) -> &[usize] {
        self.index
            .get(&(functor.clone(), arity))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn is_recursive(&self, i: usize) -> bool {
        self.recursive[i]
    }

    pub fn max_var(&self) -> Option<Var> {
        self.rules.iter().filter_map(Rule::max_var).max()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// Strips a trailing `_<digits>` level suffix.
pub fn base_symbol(s: &str) -> &str {
    match s.rfind('_') {
        Some(i) if i > 0 && i + 1 < s.len() && s[i + 1..].bytes().all(|b| b.is_ascii_digit()) => &s[..i],
        _ => s,
    }
}

/// A rule is recursive when it calls its own constraint, or, for the levels
/// of a recursionless ladder, a constraint of the same family. Pure
/// delegations are not counted.
pub fn is_recursive(r: &Rule) -> bool {
    if r.is_delegation() {
        return false;
    }
    let (sym, arity) = r.key();
    let base = base_symbol(sym.as_str());
    r.calls().any(|c| match c.functor() {
        Some((f, n)) => n == arity && (*f == sym || base_symbol(f.as_str()) == base),
        None => false,
    })
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_rule(self, &crate::syntax::PrintOptions::default()))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_program(self, &crate::syntax::PrintOptions::default()))
    }
}
