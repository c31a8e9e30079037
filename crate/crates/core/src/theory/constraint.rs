use std::collections::BTreeSet;
use std::fmt;

use super::linexpr::LinExpr;
use super::TheoryError;
use crate::term::{Subst, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "=<",
            Rel::Eq => "=:=",
            Rel::Ne => "=\\=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Rel::Lt => ord == Less,
            Rel::Le => ord != Greater,
            Rel::Eq => ord == Equal,
            Rel::Ne => ord != Equal,
            Rel::Ge => ord != Less,
            Rel::Gt => ord == Greater,
        }
    }

    pub fn negate(self) -> Rel {
        match self {
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Ge => Rel::Lt,
            Rel::Gt => Rel::Le,
        }
    }
}

/// A built-in constraint of the linear-integer + term-equality theory.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    True,
    False,
    /// Syntactic equality; numeric on arithmetic operands.
    TermEq(Term, Term),
    LinCmp(Rel, LinExpr, LinExpr),
    /// `target := expr`, single assignment.
    Assign(Var, LinExpr),
}

impl Builtin {
    pub fn eq(a: Term, b: Term) -> Builtin {
        Builtin::TermEq(a, b)
    }

    pub fn cmp(rel: Rel, lhs: LinExpr, rhs: LinExpr) -> Builtin {
        Builtin::LinCmp(rel, lhs, rhs)
    }

    /// Builds a comparison from two arithmetic terms.
    pub fn cmp_terms(rel: Rel, lhs: &Term, rhs: &Term) -> Result<Builtin, TheoryError> {
        Ok(Builtin::LinCmp(rel, LinExpr::from_term(lhs)?, LinExpr::from_term(rhs)?))
    }

    pub fn is_arithmetic(&self) -> bool {
        match self {
            Builtin::LinCmp(..) | Builtin::Assign(..) => true,
            Builtin::TermEq(a, b) => {
                (a.is_arith() || b.is_arith() || a.as_int().is_some() || b.as_int().is_some())
                    && a.is_numeric_shape()
                    && b.is_numeric_shape()
            }
            _ => false,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Builtin::True | Builtin::False => {}
            Builtin::TermEq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Builtin::LinCmp(_, l, r) => {
                out.extend(l.vars());
                out.extend(r.vars());
            }
            Builtin::Assign(v, e) => {
                out.insert(*v);
                out.extend(e.vars());
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Applies a substitution. Arithmetic positions require the image of a
    /// variable to be linearizable; an assignment whose target is mapped to a
    /// non-variable becomes an arithmetic equality.
    pub fn apply(&self, sub: &Subst) -> Result<Builtin, TheoryError> {
        let lin = |e: &LinExpr| -> Result<LinExpr, TheoryError> {
            let mut err = None;
            let out = e.substitute(&mut |v| match sub.get(v) {
                Some(t) => match LinExpr::from_term(t) {
                    Ok(e) => Some(e),
                    Err(e) => {
                        err = Some(e);
                        None
                    }
                },
                None => None,
            });
            match err {
                Some(e) => Err(e),
                None => Ok(out),
            }
        };
        Ok(match self {
            Builtin::True => Builtin::True,
            Builtin::False => Builtin::False,
            Builtin::TermEq(a, b) => Builtin::TermEq(sub.apply(a), sub.apply(b)),
            Builtin::LinCmp(rel, l, r) => Builtin::LinCmp(*rel, lin(l)?, lin(r)?),
            Builtin::Assign(v, e) => match sub.get(*v) {
                None => Builtin::Assign(*v, lin(e)?),
                Some(Term::Var(w)) => Builtin::Assign(*w, lin(e)?),
                Some(t) => Builtin::LinCmp(Rel::Eq, LinExpr::from_term(t)?, lin(e)?),
            },
        })
    }

    /// Variable-to-variable renaming; total, never fails.
    pub fn rename(&self, f: &mut dyn FnMut(Var) -> Var) -> Builtin {
        match self {
            Builtin::True => Builtin::True,
            Builtin::False => Builtin::False,
            Builtin::TermEq(a, b) => Builtin::TermEq(
                a.map_vars(&mut |v| Some(Term::Var(f(v)))),
                b.map_vars(&mut |v| Some(Term::Var(f(v)))),
            ),
            Builtin::LinCmp(rel, l, r) => Builtin::LinCmp(*rel, l.rename(f), r.rename(f)),
            Builtin::Assign(v, e) => {
                let target = f(*v);
                Builtin::Assign(target, e.rename(f))
            }
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::syntax::write_builtin(f, self, &|v| v.to_string(), None)
    }
}
