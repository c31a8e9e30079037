//! Terms, variables, substitutions and one-way matching.
//!
//! Compound terms and list cells are reference counted and carry a cached
//! groundness flag, so resolving or substituting into a ground subterm is a
//! pointer copy. List spines are walked iteratively; lists with thousands of
//! elements are routine in the reversal workloads.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

/// A logic variable. Identity is the integer; print names are assigned by the
/// printer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_G{}", self.0)
    }
}

/// Interned-by-value functor or constraint name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

#[derive(Debug)]
pub struct Cell {
    head: Term,
    tail: Term,
    ground: bool,
}

// Long lists are dropped iteratively.
impl Drop for Cell {
    fn drop(&mut self) {
        let mut tail = std::mem::replace(&mut self.tail, Term::Nil);
        while let Term::Cons(cell) = tail {
            match Arc::try_unwrap(cell) {
                Ok(mut cell) => tail = std::mem::replace(&mut cell.tail, Term::Nil),
                Err(_) => break,
            }
        }
    }
}

#[derive(Debug)]
pub struct App {
    functor: Symbol,
    args: Vec<Term>,
    ground: bool,
}

#[derive(Clone, Debug)]
pub enum Term {
    Var(Var),
    Int(BigInt),
    Nil,
    Cons(Arc<Cell>),
    App(Arc<App>),
}

pub const ARITH_FUNCTORS: [&str; 3] = ["+", "-", "*"];

impl Term {
    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn int(value: impl Into<BigInt>) -> Term {
        Term::Int(value.into())
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        let ground = head.is_ground() && tail.is_ground();
        Term::Cons(Arc::new(Cell { head, tail, ground }))
    }

    pub fn app(functor: impl Into<Symbol>, args: Vec<Term>) -> Term {
        let ground = args.iter().all(Term::is_ground);
        Term::App(Arc::new(App {
            functor: functor.into(),
            args,
            ground,
        }))
    }

    pub fn atom(name: &str) -> Term {
        Term::app(name, Vec::new())
    }

    /// Proper list of the given elements.
    pub fn list<I>(elems: I) -> Term
    where
        I: IntoIterator<Item = Term>,
        I::IntoIter: DoubleEndedIterator,
    {
        Term::list_with_tail(elems, Term::Nil)
    }

    pub fn list_with_tail<I>(elems: I, tail: Term) -> Term
    where
        I: IntoIterator<Item = Term>,
        I::IntoIter: DoubleEndedIterator,
    {
        elems
            .into_iter()
            .rev()
            .fold(tail, |acc, e| Term::cons(e, acc))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Int(_) | Term::Nil => true,
            Term::Cons(c) => c.ground,
            Term::App(a) => a.ground,
        }
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Term::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_cons(&self) -> Option<(&Term, &Term)> {
        match self {
            Term::Cons(c) => Some((&c.head, &c.tail)),
            _ => None,
        }
    }

    pub fn as_app(&self) -> Option<(&Symbol, &[Term])> {
        match self {
            Term::App(a) => Some((&a.functor, &a.args)),
            _ => None,
        }
    }

    pub fn functor(&self) -> Option<(&Symbol, usize)> {
        self.as_app().map(|(f, args)| (f, args.len()))
    }

    /// `+`, `-`, `*` compounds (binary, and unary minus).
    pub fn is_arith(&self) -> bool {
        match self.as_app() {
            Some((f, args)) => match args.len() {
                2 => ARITH_FUNCTORS.contains(&f.as_str()),
                1 => f.as_str() == "-",
                _ => false,
            },
            None => false,
        }
    }

    /// Integers, variables and arithmetic compounds.
    pub fn is_numeric_shape(&self) -> bool {
        matches!(self, Term::Int(_) | Term::Var(_)) || self.is_arith()
    }

    /// Splits a list into its elements and the final tail (`Nil` for proper
    /// lists, a variable for open lists, anything else for improper ones).
    pub fn list_parts(&self) -> (Vec<&Term>, &Term) {
        let mut elems = Vec::new();
        let mut cur = self;
        while let Term::Cons(c) = cur {
            elems.push(&c.head);
            cur = &c.tail;
        }
        (elems, cur)
    }

    pub fn proper_list(&self) -> Option<Vec<&Term>> {
        let (elems, tail) = self.list_parts();
        matches!(tail, Term::Nil).then_some(elems)
    }

    /// Number of cells before the tail.
    pub fn spine_len(&self) -> usize {
        let mut n = 0;
        let mut cur = self;
        while let Term::Cons(c) = cur {
            n += 1;
            cur = &c.tail;
        }
        n
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.visit_vars(&mut |v| {
            out.insert(v);
        });
    }

    /// Calls `f` on every variable occurrence, left to right.
    pub fn visit_vars(&self, f: &mut dyn FnMut(Var)) {
        let mut cur = self;
        loop {
            match cur {
                Term::Var(v) => {
                    f(*v);
                    return;
                }
                Term::Int(_) | Term::Nil => return,
                Term::App(a) => {
                    if !a.ground {
                        for arg in &a.args {
                            arg.visit_vars(f);
                        }
                    }
                    return;
                }
                Term::Cons(c) => {
                    if c.ground {
                        return;
                    }
                    c.head.visit_vars(f);
                    cur = &c.tail;
                }
            }
        }
    }

    pub fn contains_var(&self, v: Var) -> bool {
        let mut found = false;
        self.visit_vars(&mut |w| found |= w == v);
        found
    }

    /// Rebuilds the term with `f` applied to each variable occurrence.
    /// Subterms without a replaced variable are shared, not copied.
    pub fn map_vars(&self, f: &mut dyn FnMut(Var) -> Option<Term>) -> Term {
        self.map_vars_opt(f).unwrap_or_else(|| self.clone())
    }

    fn map_vars_opt(&self, f: &mut dyn FnMut(Var) -> Option<Term>) -> Option<Term> {
        match self {
            Term::Var(v) => f(*v),
            Term::Int(_) | Term::Nil => None,
            Term::App(a) => {
                if a.ground {
                    return None;
                }
                let mut changed: Option<Vec<Term>> = None;
                for (i, arg) in a.args.iter().enumerate() {
                    if let Some(t) = arg.map_vars_opt(f) {
                        changed.get_or_insert_with(|| a.args.clone())[i] = t;
                    }
                }
                changed.map(|args| Term::app(a.functor.clone(), args))
            }
            Term::Cons(_) => {
                let mut cells: Vec<&Cell> = Vec::new();
                let mut cur = self;
                while let Term::Cons(c) = cur {
                    if c.ground {
                        break;
                    }
                    cells.push(c);
                    cur = &c.tail;
                }
                let heads: Vec<Option<Term>> =
                    cells.iter().map(|c| c.head.map_vars_opt(f)).collect();
                let mut acc = if cur.is_ground() { None } else { cur.map_vars_opt(f) };
                for (c, h) in cells.iter().zip(heads).rev() {
                    acc = match (h, acc) {
                        (None, None) => None,
                        (h, t) => Some(Term::cons(
                            h.unwrap_or_else(|| c.head.clone()),
                            t.unwrap_or_else(|| c.tail.clone()),
                        )),
                    };
                }
                acc
            }
        }
    }

    /// Appends `suffix` to a list with a proper (`Nil`-terminated) spine.
    pub fn concat(&self, suffix: &Term) -> Option<Term> {
        let elems = self.proper_list()?;
        Some(Term::list_with_tail(
            elems.into_iter().cloned().collect::<Vec<_>>(),
            suffix.clone(),
        ))
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        let (mut a, mut b) = (self, other);
        loop {
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => return x == y,
                (Term::Int(x), Term::Int(y)) => return x == y,
                (Term::Nil, Term::Nil) => return true,
                (Term::App(x), Term::App(y)) => {
                    return Arc::ptr_eq(x, y)
                        || (x.functor == y.functor
                            && x.ground == y.ground
                            && x.args == y.args)
                }
                (Term::Cons(x), Term::Cons(y)) => {
                    if Arc::ptr_eq(x, y) {
                        return true;
                    }
                    if x.ground != y.ground || x.head != y.head {
                        return false;
                    }
                    a = &x.tail;
                    b = &y.tail;
                }
                _ => return false,
            }
        }
    }
}

impl Eq for Term {}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        let mut cur = self;
        loop {
            std::mem::discriminant(cur).hash(state);
            match cur {
                Term::Var(v) => return v.hash(state),
                Term::Int(i) => return i.hash(state),
                Term::Nil => return,
                Term::App(a) => {
                    a.functor.hash(state);
                    return a.args.hash(state);
                }
                Term::Cons(c) => {
                    c.head.hash(state);
                    cur = &c.tail;
                }
            }
        }
    }
}

impl From<Var> for Term {
    fn from(v: Var) -> Term {
        Term::Var(v)
    }
}

impl From<i64> for Term {
    fn from(i: i64) -> Term {
        Term::Int(BigInt::from(i))
    }
}

/// Plain rendering with `_G<id>` variables; the syntax printer produces
/// source-style names.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::syntax::write_term(f, self, &|v| v.to_string())
    }
}

/// A finite mapping from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    map: HashMap<Var, Term>,
}

impl Subst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.map.get(&v)
    }

    pub fn insert(&mut self, v: Var, t: Term) {
        self.map.insert(v, t);
    }

    pub fn contains(&self, v: Var) -> bool {
        self.map.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn domain(&self) -> BTreeSet<Var> {
        self.map.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        t.map_vars(&mut |v| self.map.get(&v).cloned())
    }

    /// Makes the substitution idempotent by applying it to its own range
    /// until no domain variable remains there. Cyclic bindings are left as
    /// they are after `dom` rounds.
    pub fn normalize(&mut self) {
        for _ in 0..=self.map.len() {
            let snapshot = self.clone();
            let mut changed = false;
            for t in self.map.values_mut() {
                let next = snapshot.apply(t);
                if next != *t {
                    *t = next;
                    changed = true;
                }
            }
            if !changed {
                return;
            }
        }
    }
}

impl FromIterator<(Var, Term)> for Subst {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Subst {
            map: iter.into_iter().collect(),
        }
    }
}

/// One-way matching: extends `sub` so that `pattern` under `sub` is
/// syntactically equal to `term`. Variables already in `sub` must agree.
/// On failure `sub` may hold partial bindings.
pub fn match_into(pattern: &Term, term: &Term, sub: &mut Subst) -> bool {
    let (mut p, mut t) = (pattern, term);
    loop {
        match (p, t) {
            (Term::Var(v), _) => {
                return match sub.get(*v) {
                    Some(bound) => bound == t,
                    None => {
                        sub.insert(*v, t.clone());
                        true
                    }
                };
            }
            (Term::Int(a), Term::Int(b)) => return a == b,
            (Term::Nil, Term::Nil) => return true,
            (Term::App(a), Term::App(b)) => {
                if a.functor != b.functor || a.args.len() != b.args.len() {
                    return false;
                }
                if a.ground {
                    return p == t;
                }
                return a
                    .args
                    .iter()
                    .zip(b.args.iter())
                    .all(|(x, y)| match_into(x, y, sub));
            }
            (Term::Cons(a), Term::Cons(b)) => {
                if a.ground {
                    return p == t;
                }
                if !match_into(&a.head, &b.head, sub) {
                    return false;
                }
                p = &a.tail;
                t = &b.tail;
            }
            _ => return false,
        }
    }
}

/// Returns θ with dom(θ) ⊆ vars(pattern) and θ(pattern) = term, if any.
pub fn match_term(pattern: &Term, term: &Term) -> Option<Subst> {
    let mut sub = Subst::new();
    match_into(pattern, term, &mut sub).then_some(sub)
}

/// Monotone generator of fresh variables.
#[derive(Clone, Debug, Default)]
pub struct VarSupply {
    next: u32,
}

impl VarSupply {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(next: u32) -> Self {
        VarSupply { next }
    }

    /// A supply that never yields any of `vars`.
    pub fn avoiding<I: IntoIterator<Item = Var>>(vars: I) -> Self {
        let mut s = Self::new();
        s.reserve(vars);
        s
    }

    pub fn reserve<I: IntoIterator<Item = Var>>(&mut self, vars: I) {
        for v in vars {
            self.next = self.next.max(v.0 + 1);
        }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var(self.next);
        self.next += 1;
        v
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}

/// Renames every variable of `t` to a fresh one, recording the renaming in
/// `sub` (existing entries in `sub` are reused, so several terms can share one
/// renaming).
pub fn rename_apart(t: &Term, supply: &mut VarSupply, sub: &mut Subst) -> Term {
    t.map_vars(&mut |v| {
        if let Some(t) = sub.get(v) {
            return Some(t.clone());
        }
        let fresh = Term::Var(supply.fresh());
        sub.insert(v, fresh.clone());
        Some(fresh)
    })
}
