//! Rule simplification: a registry of state-equivalence preserving laws run
//! to a fixed point.

use std::collections::BTreeSet;
use std::fmt;

use crate::program::{linear_normal, Atom, Rule};
use crate::syntax::{print_rule, PrintOptions};
use crate::term::{Subst, Term, Var};
use crate::theory::{normalize_cmp, Builtin, LinExpr, Rel, Store};

/// Which part of a rule a law rewrites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    Guard,
    Body,
    HeadGuard,
}

pub trait SimplificationLaw {
    fn name(&self) -> &'static str;
    fn scope(&self) -> Scope;
    /// One rewrite, or `None` when the law does not apply.
    fn rewrite(&self, r: &Rule) -> Option<Rule>;
}

#[derive(Clone, Debug)]
pub struct Rewrite {
    pub law: &'static str,
    pub before: Rule,
    pub after: Rule,
}

#[derive(Clone, Debug, Default)]
pub struct SimplifyReport {
    pub laws_applied: Vec<Rewrite>,
    pub eliminated_vars: BTreeSet<Var>,
}

impl SimplifyReport {
    pub fn law_names(&self) -> Vec<&'static str> {
        self.laws_applied.iter().map(|s| s.law).collect()
    }
}

impl fmt::Display for SimplifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opts = PrintOptions::listing();
        if let Some(first) = self.laws_applied.first() {
            writeln!(f, "  {}", print_rule(&first.before, &opts))?;
        }
        for s in &self.laws_applied {
            writeln!(f, "  = {{{}}}", s.law)?;
            writeln!(f, "  {}", print_rule(&s.after, &opts))?;
        }
        Ok(())
    }
}

/// Variables occurring only in the body.
pub fn locals(r: &Rule) -> BTreeSet<Var> {
    let mut fixed = r.head_vars();
    fixed.extend(r.guard_vars());
    r.body_vars().difference(&fixed).copied().collect()
}

fn builtin_occurrences(b: &Builtin, v: Var) -> usize {
    let term = |t: &Term| {
        let mut n = 0;
        t.visit_vars(&mut |w| n += usize::from(w == v));
        n
    };
    let lin = |e: &LinExpr| usize::from(e.coeff(v).is_some());
    match b {
        Builtin::True | Builtin::False => 0,
        Builtin::TermEq(a, c) => term(a) + term(c),
        Builtin::LinCmp(_, l, r) => lin(l) + lin(r),
        Builtin::Assign(w, e) => usize::from(*w == v) + lin(e),
    }
}

fn atom_occurrences(a: &Atom, v: Var) -> usize {
    let term = |t: &Term| {
        let mut n = 0;
        t.visit_vars(&mut |w| n += usize::from(w == v));
        n
    };
    match a {
        Atom::Call(t) => term(t),
        Atom::Append { args, .. } => args.iter().map(term).sum(),
        Atom::Builtin(b) => builtin_occurrences(b, v),
    }
}

/// Number of occurrences of `v` in the rule.
pub fn occurrences(r: &Rule, v: Var) -> usize {
    let mut n = 0;
    r.head.visit_vars(&mut |w| n += usize::from(w == v));
    n + r.guard.iter().map(|g| builtin_occurrences(g, v)).sum::<usize>()
        + r.body.iter().map(|a| atom_occurrences(a, v)).sum::<usize>()
}

fn substitute(r: &Rule, v: Var, t: &Term) -> Option<Rule> {
    let sub: Subst = [(v, t.clone())].into_iter().collect();
    r.apply(&sub).ok()
}

fn without_body_atom(mut r: Rule, i: usize) -> Rule {
    r.body.remove(i);
    r
}

/// Splits `a = b` into equations between corresponding sub-terms. `None` on
/// a functor clash.
fn decompose(a: &Term, b: &Term, out: &mut Vec<(Term, Term)>) -> Option<()> {
    if a == b {
        return Some(());
    }
    match (a, b) {
        (Term::App(_), Term::App(_)) if !a.is_arith() && !b.is_arith() => {
            let (f, xs) = a.as_app().expect("app");
            let (g, ys) = b.as_app().expect("app");
            if f != g || xs.len() != ys.len() {
                return None;
            }
            for (x, y) in xs.iter().zip(ys) {
                decompose(x, y, out)?;
            }
            Some(())
        }
        (Term::Cons(_), Term::Cons(_)) => {
            let (h1, t1) = a.as_cons().expect("cons");
            let (h2, t2) = b.as_cons().expect("cons");
            decompose(h1, h2, out)?;
            decompose(t1, t2, out)
        }
        (Term::Nil, Term::Cons(_)) | (Term::Cons(_), Term::Nil) => None,
        _ => {
            out.push((a.clone(), b.clone()));
            Some(())
        }
    }
}

/// (1) Propagates body equalities, including the `S=H'` introduced by
/// unfolding: compound equations are decomposed, and an equation between a
/// local variable and a term is applied as a substitution.
pub struct PropagateEqualities;

impl SimplificationLaw for PropagateEqualities {
    fn name(&self) -> &'static str {
        "propagate-equalities"
    }

    fn scope(&self) -> Scope {
        Scope::Body
    }

    fn rewrite(&self, r: &Rule) -> Option<Rule> {
        let locals = locals(r);
        for (i, atom) in r.body.iter().enumerate() {
            let Atom::Builtin(Builtin::TermEq(a, b)) = atom else { continue };
            let mut parts = Vec::new();
            if decompose(a, b, &mut parts).is_none() {
                continue;
            }
            if parts.len() != 1 || parts[0] != (a.clone(), b.clone()) {
                let mut out = r.clone();
                out.body.splice(
                    i..=i,
                    parts.into_iter().map(|(x, y)| Atom::Builtin(Builtin::TermEq(x, y))),
                );
                return Some(out);
            }
            let local = |t: &Term| t.as_var().filter(|v| locals.contains(v));
            let (x, t) = match (local(a), local(b)) {
                (Some(x), Some(y)) if x > y => (x, b),
                (Some(_), Some(y)) => (y, a),
                (Some(x), None) => (x, b),
                (None, Some(y)) => (y, a),
                (None, None) => continue,
            };
            if t.contains_var(x) {
                continue;
            }
            if let Some(out) = substitute(&without_body_atom(r.clone(), i), x, t) {
                return Some(out);
            }
        }
        None
    }
}

/// (2) Inlines chained assignments `X := e` of local variables into the
/// other arithmetic built-ins and brings arithmetic call arguments into
/// linear normal form.
pub struct InlineArithmetic;

impl SimplificationLaw for InlineArithmetic {
    fn name(&self) -> &'static str {
        "inline-arithmetic"
    }

    fn scope(&self) -> Scope {
        Scope::Body
    }

    fn rewrite(&self, r: &Rule) -> Option<Rule> {
        for x in locals(r) {
            let defs: Vec<usize> = r
                .body
                .iter()
                .enumerate()
                .filter(|(_, a)| matches!(a, Atom::Builtin(Builtin::Assign(v, _)) if *v == x))
                .map(|(i, _)| i)
                .collect();
            let [i] = defs[..] else { continue };
            let Atom::Builtin(Builtin::Assign(_, e)) = &r.body[i] else { unreachable!() };
            if e.coeff(x).is_some() {
                continue;
            }
            let arithmetic_only = r.body.iter().enumerate().all(|(j, a)| {
                j == i
                    || atom_occurrences(a, x) == 0
                    || matches!(a, Atom::Builtin(Builtin::LinCmp(..) | Builtin::Assign(..)))
            });
            let used = r.body.iter().enumerate().any(|(j, a)| j != i && atom_occurrences(a, x) > 0);
            if !arithmetic_only || !used {
                continue;
            }
            if let Some(out) = substitute(&without_body_atom(r.clone(), i), x, &e.to_term()) {
                return Some(out);
            }
        }
        let mut out = r.clone();
        let mut changed = false;
        for a in &mut out.body {
            if let Atom::Call(t) = a {
                let n = linear_normal(t);
                if n != *t {
                    *t = n;
                    changed = true;
                }
            }
        }
        changed.then_some(out)
    }
}

/// (3) Normalizes the guard: atoms implied by the rest of the guard are
/// dropped, comparisons are tightened to canonical integer form, and body
/// comparisons implied by the guard are removed.
pub struct NormalizeGuard;

impl SimplificationLaw for NormalizeGuard {
    fn name(&self) -> &'static str {
        "normalize-guard"
    }

    fn scope(&self) -> Scope {
        Scope::Guard
    }

    fn rewrite(&self, r: &Rule) -> Option<Rule> {
        for (i, g) in r.guard.iter().enumerate() {
            if !matches!(g, Builtin::LinCmp(..)) {
                continue;
            }
            let others: Vec<Builtin> = r
                .guard
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| b.clone())
                .collect();
            if let Ok(store) = Store::normalize(&others) {
                if !store.is_inconsistent() && store.entails(g) {
                    let mut out = r.clone();
                    out.guard.remove(i);
                    return Some(out);
                }
            }
        }
        for (i, g) in r.guard.iter().enumerate() {
            let Builtin::LinCmp(rel, l, c) = g else { continue };
            let Some(n) = normalize_cmp(*rel, &l.sub(c)) else { continue };
            if n != *g {
                let mut out = r.clone();
                if n == Builtin::True {
                    out.guard.remove(i);
                } else {
                    out.guard[i] = n;
                }
                return Some(out);
            }
        }
        if r.guard.is_empty() {
            return None;
        }
        let store = Store::normalize(&r.guard).ok()?;
        if store.is_inconsistent() {
            return None;
        }
        for (i, a) in r.body.iter().enumerate() {
            if let Atom::Builtin(b @ Builtin::LinCmp(..)) = a {
                if store.entails(b) {
                    return Some(without_body_atom(r.clone(), i));
                }
            }
        }
        None
    }
}

/// (4) Folds a guard equality `X=t` on a head variable back into the head,
/// undoing head flattening once unfolding is done.
pub struct FoldHead;

impl SimplificationLaw for FoldHead {
    fn name(&self) -> &'static str {
        "fold-head"
    }

    fn scope(&self) -> Scope {
        Scope::HeadGuard
    }

    fn rewrite(&self, r: &Rule) -> Option<Rule> {
        let head = r.head_vars();
        for (i, g) in r.guard.iter().enumerate() {
            let Builtin::TermEq(a, b) = g else { continue };
            let (x, t) = match (a.as_var(), b.as_var()) {
                (Some(x), None) if head.contains(&x) => (x, b),
                (None, Some(y)) if head.contains(&y) => (y, a),
                _ => continue,
            };
            if t.is_arith() || t.is_numeric_shape() || t.contains_var(x) {
                continue;
            }
            let mut out = r.clone();
            out.guard.remove(i);
            if let Some(out) = substitute(&out, x, t) {
                return Some(out);
            }
        }
        None
    }
}

/// (5) Fuses append chains through a local intermediate list.
pub struct FuseAppend;

impl SimplificationLaw for FuseAppend {
    fn name(&self) -> &'static str {
        "fuse-append"
    }

    fn scope(&self) -> Scope {
        Scope::Body
    }

    fn rewrite(&self, r: &Rule) -> Option<Rule> {
        let locals: BTreeSet<Var> = locals(r).into_iter().filter(|v| occurrences(r, *v) == 2).collect();
        let body = fuse_once(&r.body, &locals)?;
        let mut out = r.clone();
        out.body = body;
        Some(out)
    }
}

fn fuse_once(body: &[Atom], locals: &BTreeSet<Var>) -> Option<Vec<Atom>> {
    for (i, a) in body.iter().enumerate() {
        let Atom::Append { name, args: [x, l1, y] } = a else { continue };
        let Some(yv) = y.as_var().filter(|v| locals.contains(v)) else { continue };
        let Some(first) = l1.proper_list() else { continue };
        for (j, b) in body.iter().enumerate() {
            let Atom::Append { args: [y2, l2, z], .. } = b else { continue };
            if j == i || y2.as_var() != Some(yv) {
                continue;
            }
            let Some(second) = l2.proper_list() else { continue };
            let seg = Term::list(first.iter().chain(second.iter()).map(|t| (*t).clone()).collect::<Vec<_>>());
            let fused = Atom::Append {
                name: name.clone(),
                args: [x.clone(), seg, z.clone()],
            };
            let mut out: Vec<Atom> = body.to_vec();
            out[j] = fused;
            out.remove(i);
            return Some(out);
        }
    }
    None
}

/// Replaces every chain `a(X,L1,Y), a(Y,L2,Z)` with `Y` in `locals` and
/// closed lists `L1`, `L2` by `a(X,L1++L2,Z)`, to a fixed point. Callers
/// pass only locals that occur exactly twice.
pub fn fuse_append(body: &[Atom], locals: &BTreeSet<Var>) -> Vec<Atom> {
    let mut cur = body.to_vec();
    while let Some(next) = fuse_once(&cur, locals) {
        cur = next;
    }
    cur
}

/// (6) Eliminates local variables defined by a single equality or
/// assignment, and drops definitions of locals used nowhere else.
pub struct EliminateLocals;

fn definition(a: &Atom, x: Var) -> Option<Term> {
    match a {
        Atom::Builtin(Builtin::TermEq(l, r)) => {
            if l.as_var() == Some(x) && !r.contains_var(x) {
                Some(r.clone())
            } else if r.as_var() == Some(x) && !l.contains_var(x) {
                Some(l.clone())
            } else {
                None
            }
        }
        Atom::Builtin(Builtin::Assign(v, e)) if *v == x && e.coeff(x).is_none() => Some(e.to_term()),
        Atom::Builtin(Builtin::LinCmp(Rel::Eq, l, r)) => {
            let e = l.sub(r);
            let c = e.coeff(x)?;
            // x = -(e - c·x)/c when c = ±1
            let rest = e.sub(&LinExpr::term(c.clone(), x));
            if num_traits::One::is_one(c) {
                Some(rest.neg().to_term())
            } else if num_traits::One::is_one(&-c) {
                Some(rest.to_term())
            } else {
                None
            }
        }
        _ => None,
    }
}

impl SimplificationLaw for EliminateLocals {
    fn name(&self) -> &'static str {
        "eliminate-locals"
    }

    fn scope(&self) -> Scope {
        Scope::Body
    }

    fn rewrite(&self, r: &Rule) -> Option<Rule> {
        for x in locals(r) {
            let mentions: Vec<usize> = r
                .body
                .iter()
                .enumerate()
                .filter(|(_, a)| atom_occurrences(a, x) > 0)
                .map(|(i, _)| i)
                .collect();
            let defs: Vec<(usize, Term)> = mentions
                .iter()
                .filter_map(|&i| definition(&r.body[i], x).map(|t| (i, t)))
                .collect();
            let [(i, ref t)] = defs[..] else { continue };
            let rest = without_body_atom(r.clone(), i);
            if mentions.len() == 1 {
                return Some(rest);
            }
            // An equation is one constraint among several on x: keep it when
            // the other mentions are not plain uses.
            let others_define = mentions
                .iter()
                .any(|&j| j != i && matches!(r.body[j], Atom::Builtin(Builtin::TermEq(..))));
            if others_define {
                continue;
            }
            if let Some(out) = substitute(&rest, x, t) {
                return Some(out);
            }
        }
        None
    }
}

/// The laws in pipeline order.
pub fn default_laws() -> Vec<Box<dyn SimplificationLaw>> {
    vec![
        Box::new(PropagateEqualities),
        Box::new(InlineArithmetic),
        Box::new(NormalizeGuard),
        Box::new(FoldHead),
        Box::new(FuseAppend),
        Box::new(EliminateLocals),
    ]
}

const MAX_REWRITES: usize = 10_000;

/// Runs `laws` to a fixed point: each pass tries the laws in order and
/// restarts after the first rewrite.
pub fn simplify_with(r: &Rule, laws: &[Box<dyn SimplificationLaw>]) -> (Rule, SimplifyReport) {
    let mut cur = r.clone();
    let mut report = SimplifyReport::default();
    'outer: for _ in 0..MAX_REWRITES {
        for law in laws {
            if let Some(next) = law.rewrite(&cur) {
                if next != cur {
                    report.laws_applied.push(Rewrite {
                        law: law.name(),
                        before: cur.clone(),
                        after: next.clone(),
                    });
                    cur = next;
                    continue 'outer;
                }
            }
        }
        break;
    }
    let after = cur.vars();
    report.eliminated_vars = r.vars().difference(&after).copied().collect();
    cur.names.retain(|v, _| after.contains(v));
    (cur, report)
}

pub fn simplify_rule(r: &Rule) -> (Rule, SimplifyReport) {
    simplify_with(r, &default_laws())
}

/// The local-elimination law alone, to a fixed point.
pub fn eliminate_locals(r: &Rule) -> Rule {
    let laws: Vec<Box<dyn SimplificationLaw>> = vec![Box::new(EliminateLocals)];
    simplify_with(r, &laws).0
}
