//! The built-in constraint store: term bindings with aliasing, linear rows over
//! the remaining integer variables, and arithmetic disequations.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;

use super::constraint::{Builtin, Rel};
use super::fm::{self, Kind, Norm, Projection, Row};
use super::linexpr::LinExpr;
use super::TheoryError;
use crate::term::{Term, Var};

/// Components larger than this are not checked eagerly when a row is added.
const EAGER_COMPONENT_LIMIT: usize = 64;

#[derive(Clone, Debug, Default)]
pub struct Store {
    bindings: HashMap<Var, Term>,
    rows: Vec<Option<Row>>,
    watch: HashMap<Var, Vec<usize>>,
    diseqs: Vec<LinExpr>,
    inconsistent: bool,
    strict_assign: bool,
    /// Variables of rows rewritten by propagation, checked once it settles.
    rewritten: Vec<Var>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    /// In strict mode `X := e` requires `e` to be ground when told.
    pub fn strict() -> Self {
        Store {
            strict_assign: true,
            ..Self::default()
        }
    }

    /// Tells every constraint, then drops rows implied by the others.
    pub fn normalize(cs: &[Builtin]) -> Result<Store, TheoryError> {
        let mut s = Store::new();
        for c in cs {
            s.tell(c)?;
        }
        s.prune();
        Ok(s)
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    fn fail(&mut self) {
        self.inconsistent = true;
    }

    // ---- terms ---------------------------------------------------------

    /// Follows variable bindings at the top of `t`.
    pub fn walk(&self, t: &Term) -> Term {
        let mut cur = t.clone();
        while let Term::Var(v) = cur {
            match self.bindings.get(&v) {
                Some(next) => cur = next.clone(),
                None => return Term::Var(v),
            }
        }
        cur
    }

    fn walk_var(&self, mut v: Var) -> Term {
        loop {
            match self.bindings.get(&v) {
                Some(Term::Var(w)) => v = *w,
                Some(t) => return t.clone(),
                None => return Term::Var(v),
            }
        }
    }

    /// Applies all bindings, deeply.
    pub fn resolve(&self, t: &Term) -> Term {
        if t.is_ground() || self.bindings.is_empty() {
            return t.clone();
        }
        t.map_vars(&mut |v| match self.walk_var(v) {
            Term::Var(w) if w == v => None,
            bound => Some(self.resolve(&bound)),
        })
    }

    pub fn is_bound(&self, v: Var) -> bool {
        self.bindings.contains_key(&v)
    }

    /// Linear form of `e` with bound variables replaced.
    fn lin(&self, e: &LinExpr) -> Option<LinExpr> {
        let mut ok = true;
        let out = e.substitute(&mut |v| match self.walk_var(v) {
            Term::Var(w) if w == v => None,
            Term::Var(w) => Some(LinExpr::var(w)),
            t => match LinExpr::from_term(&self.resolve(&t)) {
                Ok(e) => Some(e),
                Err(_) => {
                    ok = false;
                    None
                }
            },
        });
        ok.then_some(out)
    }

    fn lin_term(&self, t: &Term) -> Option<LinExpr> {
        LinExpr::from_term(&self.resolve(t)).ok()
    }

    /// Value of `e` when every variable is bound to an integer.
    pub fn eval_ground(&self, e: &LinExpr) -> Result<BigInt, TheoryError> {
        let l = self
            .lin(e)
            .ok_or_else(|| TheoryError::NonLinear(format!("non-numeric value in {e}")))?;
        match l.as_constant() {
            Some(k) => Ok(k.clone()),
            None => Err(TheoryError::Unbound(format!(
                "{} unbound in {e}",
                l.vars().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    // ---- telling -------------------------------------------------------

    pub fn tell(&mut self, c: &Builtin) -> Result<(), TheoryError> {
        if self.inconsistent {
            return Ok(());
        }
        match c {
            Builtin::True => {}
            Builtin::False => self.fail(),
            Builtin::TermEq(a, b) => self.unify(a, b),
            Builtin::LinCmp(rel, l, r) => {
                let (Some(l), Some(r)) = (self.lin(l), self.lin(r)) else {
                    self.fail();
                    return Ok(());
                };
                let e = l.sub(&r);
                match rel {
                    Rel::Ne => self.add_diseq(e),
                    rel => {
                        for row in rows_for(*rel, &e) {
                            self.add_row(row, true);
                        }
                    }
                }
            }
            Builtin::Assign(v, e) => {
                let Some(e) = self.lin(e) else {
                    self.fail();
                    return Ok(());
                };
                if self.strict_assign && e.as_constant().is_none() {
                    return Err(TheoryError::Unbound(format!("{v} := {e}")));
                }
                let Some(target) = self.lin(&LinExpr::var(*v)) else {
                    self.fail();
                    return Ok(());
                };
                self.add_row(Row::eq(target.sub(&e)), true);
            }
        }
        Ok(())
    }

    pub fn tell_all<'a, I: IntoIterator<Item = &'a Builtin>>(
        &mut self,
        cs: I,
    ) -> Result<(), TheoryError> {
        for c in cs {
            self.tell(c)?;
        }
        Ok(())
    }

    /// Equates two terms. Arithmetic operands are compared numerically.
    pub fn unify(&mut self, a: &Term, b: &Term) {
        let mut work = vec![(a.clone(), b.clone())];
        while let Some((a, b)) = work.pop() {
            if self.inconsistent {
                return;
            }
            let (a, b) = (self.walk(&a), self.walk(&b));
            match (&a, &b) {
                (Term::Var(x), Term::Var(y)) => {
                    if x != y {
                        self.alias(*x, *y);
                    }
                }
                (Term::Var(x), t) | (t, Term::Var(x)) => self.bind(*x, t),
                (Term::Int(x), Term::Int(y)) => {
                    if x != y {
                        self.fail();
                    }
                }
                _ if (a.is_arith() || b.is_arith())
                    && a.is_numeric_shape()
                    && b.is_numeric_shape() =>
                {
                    match (self.lin_term(&a), self.lin_term(&b)) {
                        (Some(l), Some(r)) => self.add_row(Row::eq(l.sub(&r)), true),
                        _ => self.fail(),
                    }
                }
                (Term::Nil, Term::Nil) => {}
                (Term::App(_), Term::App(_)) => {
                    let (f, xs) = a.as_app().expect("app");
                    let (g, ys) = b.as_app().expect("app");
                    if f != g || xs.len() != ys.len() {
                        self.fail();
                    } else {
                        work.extend(xs.iter().cloned().zip(ys.iter().cloned()));
                    }
                }
                (Term::Cons(_), Term::Cons(_)) => {
                    let (mut p, mut q) = (a.clone(), b.clone());
                    while let (Some((h1, t1)), Some((h2, t2))) = (p.as_cons(), q.as_cons()) {
                        work.push((h1.clone(), h2.clone()));
                        let (t1, t2) = (t1.clone(), t2.clone());
                        p = t1;
                        q = t2;
                    }
                    work.push((p, q));
                }
                _ => self.fail(),
            }
        }
    }

    fn has_rows(&self, v: Var) -> bool {
        self.watch
            .get(&v)
            .is_some_and(|ids| ids.iter().any(|&i| self.rows[i].as_ref().is_some_and(|r| r.mentions(v))))
    }

    fn occurs(&self, v: Var, t: &Term) -> bool {
        if t.is_ground() {
            return false;
        }
        let mut found = false;
        let mut stack = vec![t.clone()];
        let mut seen = HashSet::new();
        while let Some(t) = stack.pop() {
            t.visit_vars(&mut |w| {
                if w == v {
                    found = true;
                } else if seen.insert(w) {
                    if let Some(b) = self.bindings.get(&w) {
                        stack.push(b.clone());
                    }
                }
            });
            if found {
                return true;
            }
        }
        false
    }

    /// Binds an unbound variable to a non-variable term.
    fn bind(&mut self, x: Var, t: &Term) {
        if let Term::Int(k) = t {
            self.bind_int(x, k.clone());
            return;
        }
        if t.is_arith() {
            match self.lin_term(t) {
                Some(e) => self.add_row(Row::eq(LinExpr::var(x).sub(&e)), true),
                None => self.fail(),
            }
            return;
        }
        if self.has_rows(x) || self.diseqs.iter().any(|d| self.lin(d).is_some_and(|d| d.coeff(x).is_some())) {
            self.fail();
            return;
        }
        if self.occurs(x, t) {
            self.fail();
            return;
        }
        self.bindings.insert(x, t.clone());
    }

    fn alias(&mut self, x: Var, y: Var) {
        let (keep, gone) = if x < y { (x, y) } else { (y, x) };
        self.bindings.insert(gone, Term::Var(keep));
        let ids = self.watch.remove(&gone).unwrap_or_default();
        let with = LinExpr::var(keep);
        let mut solved = Vec::new();
        for id in ids {
            let Some(row) = self.rows[id].take() else { continue };
            if !row.mentions(gone) {
                self.rows[id] = Some(row);
                continue;
            }
            let expr = row.expr.substitute(&mut |v| (v == gone).then(|| with.clone()));
            self.reinsert(id, Row { expr, kind: row.kind }, &mut solved);
        }
        self.drain(solved);
        self.check_diseqs();
        self.recheck();
    }

    fn bind_int(&mut self, x: Var, k: BigInt) {
        self.drain(vec![(x, k)]);
        self.check_diseqs();
        self.recheck();
    }

    /// Rows rewritten by a binding can contradict rows they were not
    /// checked against before, so their component is checked again.
    fn recheck(&mut self) {
        let mut vars = std::mem::take(&mut self.rewritten);
        vars.sort();
        vars.dedup();
        if !vars.is_empty() {
            self.eager_check(&vars);
        }
    }

    /// Binds solved variables and propagates through the rows watching them.
    fn drain(&mut self, mut work: Vec<(Var, BigInt)>) {
        while let Some((v, k)) = work.pop() {
            if self.inconsistent {
                return;
            }
            match self.walk_var(v) {
                Term::Var(w) if w == v => {}
                Term::Var(w) => {
                    work.push((w, k));
                    continue;
                }
                Term::Int(j) => {
                    if j != k {
                        self.fail();
                    }
                    continue;
                }
                _ => {
                    self.fail();
                    continue;
                }
            }
            self.bindings.insert(v, Term::Int(k.clone()));
            let with = LinExpr::constant(k);
            for id in self.watch.remove(&v).unwrap_or_default() {
                let Some(row) = self.rows[id].take() else { continue };
                if !row.mentions(v) {
                    self.rows[id] = Some(row);
                    continue;
                }
                let expr = row.expr.substitute(&mut |w| (w == v).then(|| with.clone()));
                self.reinsert(id, Row { expr, kind: row.kind }, &mut work);
            }
        }
    }

    /// Puts a rewritten row back under `id`, or resolves it.
    fn reinsert(&mut self, id: usize, row: Row, solved: &mut Vec<(Var, BigInt)>) {
        match row.normalize() {
            Norm::True => {}
            Norm::False => self.fail(),
            Norm::Row(r) => {
                if let Some((v, k)) = single_solution(&r) {
                    solved.push((v, k));
                    return;
                }
                for v in r.vars() {
                    let ids = self.watch.entry(v).or_default();
                    if !ids.contains(&id) {
                        ids.push(id);
                    }
                    self.rewritten.push(v);
                }
                self.rows[id] = Some(r);
            }
        }
    }

    fn add_row(&mut self, row: Row, eager: bool) {
        let Some(expr) = self.lin(&row.expr) else {
            self.fail();
            return;
        };
        match (Row { expr, kind: row.kind }).normalize() {
            Norm::True => {}
            Norm::False => self.fail(),
            Norm::Row(r) => {
                if let Some((v, k)) = single_solution(&r) {
                    self.bind_int(v, k);
                    return;
                }
                let id = self.rows.len();
                let vars: Vec<Var> = r.vars().collect();
                for v in &vars {
                    self.watch.entry(*v).or_default().push(id);
                }
                self.rows.push(Some(r));
                if eager {
                    self.eager_check(&vars);
                }
            }
        }
    }

    fn add_diseq(&mut self, e: LinExpr) {
        match e.as_constant() {
            Some(k) => {
                if num_traits::Zero::is_zero(k) {
                    self.fail();
                }
            }
            None => {
                let vars: Vec<Var> = e.vars().collect();
                self.diseqs.push(e);
                self.eager_check(&vars);
            }
        }
    }

    fn check_diseqs(&mut self) {
        for d in &self.diseqs {
            if let Some(e) = self.lin(d) {
                if e.as_constant().is_some_and(num_traits::Zero::is_zero) {
                    self.inconsistent = true;
                    return;
                }
            }
        }
    }

    /// Satisfiability check restricted to a small component.
    fn eager_check(&mut self, vars: &[Var]) {
        if self.inconsistent {
            return;
        }
        if let Some((rows, diseqs)) = self.component(vars, Some(EAGER_COMPONENT_LIMIT)) {
            if !sat_with_diseqs(rows, &diseqs) {
                self.fail();
            }
        }
    }

    /// Rows and disequations transitively sharing variables with `vars`.
    /// `None` if the component exceeds `limit` variables.
    fn component(&self, vars: &[Var], limit: Option<usize>) -> Option<(Vec<Row>, Vec<LinExpr>)> {
        let diseqs: Vec<LinExpr> = self.diseqs.iter().filter_map(|d| self.lin(d)).collect();
        let mut seen_vars: BTreeSet<Var> = BTreeSet::new();
        let mut seen_rows: BTreeSet<usize> = BTreeSet::new();
        let mut seen_diseqs: BTreeSet<usize> = BTreeSet::new();
        let mut stack: Vec<Var> = vars.to_vec();
        while let Some(v) = stack.pop() {
            if !seen_vars.insert(v) {
                continue;
            }
            if limit.is_some_and(|l| seen_vars.len() > l) {
                return None;
            }
            for &id in self.watch.get(&v).map(|v| v.as_slice()).unwrap_or(&[]) {
                if let Some(r) = &self.rows[id] {
                    if r.mentions(v) && seen_rows.insert(id) {
                        stack.extend(r.vars());
                    }
                }
            }
            for (i, d) in diseqs.iter().enumerate() {
                if d.coeff(v).is_some() && seen_diseqs.insert(i) {
                    stack.extend(d.vars());
                }
            }
        }
        let rows = seen_rows
            .into_iter()
            .filter_map(|i| self.rows[i].clone())
            .collect();
        let ds = seen_diseqs.into_iter().map(|i| diseqs[i].clone()).collect();
        Some((rows, ds))
    }

    fn live_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().flatten()
    }

    /// Removes rows implied by the remaining ones.
    fn prune(&mut self) {
        if self.inconsistent {
            return;
        }
        let mut kept: Vec<Row> = Vec::new();
        let mut all: Vec<Row> = self.live_rows().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        while !all.is_empty() {
            let row = all.remove(0);
            let others: Vec<Row> = kept.iter().chain(all.iter()).cloned().collect();
            if !row_entailed(&others, &row) {
                kept.push(row);
            }
        }
        self.rows = kept.into_iter().map(Some).collect();
        self.watch.clear();
        for (id, r) in self.rows.iter().enumerate() {
            for v in r.as_ref().expect("live").vars() {
                self.watch.entry(v).or_default().push(id);
            }
        }
        let mut ds: Vec<LinExpr> = Vec::new();
        for d in self.diseqs.clone() {
            if let Some(d) = self.lin(&d).filter(|d| d.as_constant().is_none()) {
                let d = canonical_diseq(d);
                if !ds.contains(&d) {
                    ds.push(d);
                }
            }
        }
        ds.sort();
        self.diseqs = ds;
    }

    // ---- queries -------------------------------------------------------

    pub fn satisfiable(&self) -> bool {
        if self.inconsistent {
            return false;
        }
        let rows: Vec<Row> = self.live_rows().cloned().collect();
        let diseqs: Vec<LinExpr> = self.diseqs.iter().filter_map(|d| self.lin(d)).collect();
        // Independent components are decided separately.
        let mut done: BTreeSet<Var> = BTreeSet::new();
        for r in rows.iter() {
            let Some(v) = r.vars().next() else { continue };
            if done.contains(&v) {
                continue;
            }
            let (rs, ds) = self.component(&[v], None).expect("unbounded");
            for r in &rs {
                done.extend(r.vars());
            }
            if !sat_with_diseqs(rs, &ds) {
                return false;
            }
        }
        for d in &diseqs {
            if d.vars().all(|v| !done.contains(&v)) && d.as_constant().is_some_and(num_traits::Zero::is_zero) {
                return false;
            }
        }
        true
    }

    /// Whether every solution of the store satisfies `c`.
    pub fn entails(&self, c: &Builtin) -> bool {
        if self.inconsistent {
            return true;
        }
        match c {
            Builtin::True => true,
            Builtin::False => false,
            Builtin::TermEq(a, b) => self.entails_eq(a, b),
            Builtin::LinCmp(rel, l, r) => match (self.lin(l), self.lin(r)) {
                (Some(l), Some(r)) => self.entails_lin(*rel, &l.sub(&r)),
                _ => false,
            },
            Builtin::Assign(v, e) => match (self.lin(&LinExpr::var(*v)), self.lin(e)) {
                (Some(l), Some(r)) => self.entails_lin(Rel::Eq, &l.sub(&r)),
                _ => false,
            },
        }
    }

    fn entails_eq(&self, a: &Term, b: &Term) -> bool {
        let mut work = vec![(a.clone(), b.clone())];
        while let Some((a, b)) = work.pop() {
            let (a, b) = (self.walk(&a), self.walk(&b));
            if a == b {
                continue;
            }
            if a.is_numeric_shape() && b.is_numeric_shape() {
                match (self.lin_term(&a), self.lin_term(&b)) {
                    (Some(l), Some(r)) if self.entails_lin(Rel::Eq, &l.sub(&r)) => continue,
                    _ => return false,
                }
            }
            match (&a, &b) {
                (Term::App(_), Term::App(_)) => {
                    let (f, xs) = a.as_app().expect("app");
                    let (g, ys) = b.as_app().expect("app");
                    if f != g || xs.len() != ys.len() {
                        return false;
                    }
                    work.extend(xs.iter().cloned().zip(ys.iter().cloned()));
                }
                (Term::Cons(_), Term::Cons(_)) => {
                    let (h1, t1) = a.as_cons().expect("cons");
                    let (h2, t2) = b.as_cons().expect("cons");
                    work.push((h1.clone(), h2.clone()));
                    work.push((t1.clone(), t2.clone()));
                }
                _ => return false,
            }
        }
        true
    }

    /// Whether the store implies `e rel 0`.
    pub fn entails_lin(&self, rel: Rel, e: &LinExpr) -> bool {
        if self.inconsistent {
            return true;
        }
        if let Some(k) = e.as_constant() {
            return rel.holds(k.cmp(&BigInt::from(0)));
        }
        let vars: Vec<Var> = e.vars().collect();
        let Some((rows, diseqs)) = self.component(&vars, None) else {
            return false;
        };
        let one = LinExpr::constant(1);
        // Each alternative of ¬(e rel 0) must be unsatisfiable.
        let negations: Vec<Vec<Row>> = match rel {
            Rel::Le => vec![vec![Row::le(one.sub(e))]],
            Rel::Lt => vec![vec![Row::le(e.neg())]],
            Rel::Ge => vec![vec![Row::le(e.add(&one))]],
            Rel::Gt => vec![vec![Row::le(e.clone())]],
            Rel::Eq => vec![vec![Row::le(one.sub(e))], vec![Row::le(e.add(&one))]],
            Rel::Ne => vec![vec![Row::eq(e.clone())]],
        };
        negations.into_iter().all(|extra| {
            let mut rs = rows.clone();
            rs.extend(extra);
            !sat_with_diseqs(rs, &diseqs)
        })
    }

    /// Canonical listing of the store's content.
    pub fn constraints(&self) -> Vec<Builtin> {
        if self.inconsistent {
            return vec![Builtin::False];
        }
        let mut out = Vec::new();
        let mut bound: Vec<&Var> = self.bindings.keys().collect();
        bound.sort();
        for v in bound {
            out.push(Builtin::TermEq(Term::Var(*v), self.resolve(&Term::Var(*v))));
        }
        let mut rows: Vec<Row> = self.live_rows().cloned().collect();
        rows.sort();
        rows.dedup();
        out.extend(rows.iter().map(row_to_builtin));
        let mut ds: Vec<LinExpr> = self
            .diseqs
            .iter()
            .filter_map(|d| self.lin(d))
            .filter(|d| d.as_constant().is_none())
            .map(canonical_diseq)
            .collect();
        ds.sort();
        ds.dedup();
        out.extend(ds.into_iter().map(|d| {
            let k = d.constant_part().clone();
            Builtin::LinCmp(Rel::Ne, d.add_constant(&-&k), LinExpr::constant(-k))
        }));
        out
    }

    /// Linear rows only, as built-ins.
    pub fn arithmetic(&self) -> Vec<Builtin> {
        let mut rows: Vec<Row> = self.live_rows().cloned().collect();
        rows.sort();
        rows.dedup();
        rows.iter().map(row_to_builtin).collect()
    }

    /// Constraints restricted to `keep`: bindings of kept variables and the
    /// projection of the arithmetic rows.
    pub fn project(&self, keep: &BTreeSet<Var>) -> Vec<Builtin> {
        if self.inconsistent {
            return vec![Builtin::False];
        }
        let mut out = Vec::new();
        for v in keep {
            if self.is_bound(*v) {
                out.push(Builtin::TermEq(Term::Var(*v), self.resolve(&Term::Var(*v))));
            }
        }
        let free: BTreeSet<Var> = keep.iter().filter(|v| !self.is_bound(**v)).copied().collect();
        let rows: Vec<Row> = self.live_rows().cloned().collect();
        if let Projection::Rows(rs) = fm::project(&rows, &free) {
            out.extend(rs.iter().map(row_to_builtin));
        }
        out
    }

    /// Variables occurring in the arithmetic rows.
    pub fn row_vars(&self) -> BTreeSet<Var> {
        self.live_rows().flat_map(|r| r.vars().collect::<Vec<_>>()).collect()
    }
}

/// Atoms of `cs` not entailed by `store`, in input order.
pub fn diff(cs: &[Builtin], store: &Store) -> Vec<Builtin> {
    cs.iter().filter(|c| !store.entails(c)).cloned().collect()
}

/// Canonical form of the single comparison `e rel 0`, as a guard would be
/// written. `None` for disequations.
pub fn normalize_cmp(rel: Rel, e: &LinExpr) -> Option<Builtin> {
    if rel == Rel::Ne {
        return None;
    }
    let row = rows_for(rel, e).pop()?;
    Some(match row.normalize() {
        Norm::True => Builtin::True,
        Norm::False => Builtin::False,
        Norm::Row(r) => row_to_builtin(&r),
    })
}

fn rows_for(rel: Rel, e: &LinExpr) -> Vec<Row> {
    let one = LinExpr::constant(1);
    match rel {
        Rel::Lt => vec![Row::le(e.add(&one))],
        Rel::Le => vec![Row::le(e.clone())],
        Rel::Eq => vec![Row::eq(e.clone())],
        Rel::Ge => vec![Row::le(e.neg())],
        Rel::Gt => vec![Row::le(one.sub(e))],
        Rel::Ne => unreachable!("disequations are not rows"),
    }
}

fn single_solution(r: &Row) -> Option<(Var, BigInt)> {
    if r.kind != Kind::Eq || r.expr.coeffs().len() != 1 {
        return None;
    }
    let (v, c) = r.expr.coeffs().iter().next()?;
    // normalized: c = 1
    debug_assert!(num_traits::One::is_one(c));
    Some((*v, -r.expr.constant_part()))
}

fn canonical_diseq(d: LinExpr) -> LinExpr {
    match d.coeffs().values().next() {
        Some(c) if num_traits::Signed::is_negative(c) => d.neg(),
        _ => d,
    }
}

fn row_entailed(others: &[Row], row: &Row) -> bool {
    let one = LinExpr::constant(1);
    let negs: Vec<Row> = match row.kind {
        Kind::Le => vec![Row::le(one.sub(&row.expr))],
        Kind::Eq => vec![Row::le(one.sub(&row.expr)), Row::le(row.expr.add(&one))],
    };
    negs.into_iter().all(|n| {
        let mut rs = others.to_vec();
        rs.push(n);
        !fm::satisfiable(&rs)
    })
}

/// Renders a normalized row. Single-variable bounds print as `X > k` or
/// `X < k`, the form rule guards are written in.
pub fn row_to_builtin(r: &Row) -> Builtin {
    let k = r.expr.constant_part().clone();
    let lhs = r.expr.add_constant(&-&k);
    if r.kind == Kind::Le && r.expr.coeffs().len() == 1 {
        let (v, c) = r.expr.coeffs().iter().next().expect("one var");
        let x = LinExpr::var(*v);
        if num_traits::One::is_one(c) {
            // x + k ≤ 0  ⇔  x < 1 - k
            return Builtin::LinCmp(Rel::Lt, x, LinExpr::constant(BigInt::from(1) - k));
        }
        if num_traits::One::is_one(&-c) {
            // -x + k ≤ 0  ⇔  x > k - 1
            return Builtin::LinCmp(Rel::Gt, x, LinExpr::constant(k - 1));
        }
    }
    let rel = match r.kind {
        Kind::Le => Rel::Le,
        Kind::Eq => Rel::Eq,
    };
    Builtin::LinCmp(rel, lhs, LinExpr::constant(-k))
}

fn sat_with_diseqs(rows: Vec<Row>, diseqs: &[LinExpr]) -> bool {
    match diseqs.split_first() {
        None => fm::satisfiable(&rows),
        Some((d, rest)) => {
            let one = LinExpr::constant(1);
            let mut lt = rows.clone();
            lt.push(Row::le(d.add(&one)));
            if sat_with_diseqs(lt, rest) {
                return true;
            }
            let mut gt = rows;
            gt.push(Row::le(one.sub(d)));
            sat_with_diseqs(gt, rest)
        }
    }
}
