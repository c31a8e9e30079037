//! Fourier–Motzkin elimination over integer rows.
//!
//! Rows are `e ≤ 0` or `e = 0` with integer coefficients. Every derived row is
//! tightened (coefficients divided by their gcd, constant rounded towards the
//! feasible side), which makes the rational projection strictly stronger than
//! plain FM. On top of that, [`satisfiable`] enumerates a variable whose
//! projected range is small, so systems whose variables are bounded are decided
//! exactly over the integers.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::linexpr::LinExpr;
use crate::term::Var;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Le,
    Eq,
}

/// `expr ≤ 0` or `expr = 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Row {
    pub expr: LinExpr,
    pub kind: Kind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Norm {
    True,
    False,
    Row(Row),
}

/// Largest range enumerated by the exact refinement.
const ENUM_LIMIT: u64 = 64;
/// Row count above which elimination gives up and reports "satisfiable".
const ROW_LIMIT: usize = 4000;

impl Row {
    pub fn le(expr: LinExpr) -> Row {
        Row { expr, kind: Kind::Le }
    }

    pub fn eq(expr: LinExpr) -> Row {
        Row { expr, kind: Kind::Eq }
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.expr.vars()
    }

    pub fn mentions(&self, v: Var) -> bool {
        self.expr.coeff(v).is_some()
    }

    /// Canonical integer form.
    pub fn normalize(self) -> Norm {
        let k = self.expr.constant_part().clone();
        if self.expr.as_constant().is_some() {
            let ok = match self.kind {
                Kind::Le => !k.is_positive(),
                Kind::Eq => k.is_zero(),
            };
            return if ok { Norm::True } else { Norm::False };
        }
        let mut g = BigInt::zero();
        for c in self.expr.coeffs().values() {
            g = g.gcd(c);
        }
        let (lead_negative, _) = {
            let (_, c) = self.expr.coeffs().iter().next().expect("non-constant row");
            (c.is_negative(), ())
        };
        match self.kind {
            Kind::Le => {
                // Σc·x + k ≤ 0  ⇔  Σ(c/g)·x + ⌈k/g⌉ ≤ 0 over the integers
                let tightened = ceil_div(&k, &g);
                let expr = rebuild(&self.expr, &g, tightened);
                Norm::Row(Row::le(expr))
            }
            Kind::Eq => {
                if !(&k % &g).is_zero() {
                    return Norm::False;
                }
                let g = if lead_negative { -g } else { g };
                let expr = rebuild(&self.expr, &g, &k / &g);
                Norm::Row(Row::eq(expr))
            }
        }
    }

    fn substitute(&self, v: Var, with: &LinExpr) -> Row {
        Row {
            expr: self.expr.substitute(&mut |w| (w == v).then(|| with.clone())),
            kind: self.kind,
        }
    }
}

fn rebuild(e: &LinExpr, g: &BigInt, constant: BigInt) -> LinExpr {
    let mut out = LinExpr::constant(constant);
    for (v, c) in e.coeffs() {
        out = out.add(&LinExpr::term(c / g, *v));
    }
    out
}

pub fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

pub fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

/// Normalizes a batch. `None` when some row is trivially false.
pub fn normalize_all<I: IntoIterator<Item = Row>>(rows: I) -> Option<Vec<Row>> {
    let mut out = BTreeSet::new();
    for r in rows {
        match r.normalize() {
            Norm::True => {}
            Norm::False => return None,
            Norm::Row(r) => {
                out.insert(r);
            }
        }
    }
    Some(out.into_iter().collect())
}

fn all_vars(rows: &[Row]) -> BTreeSet<Var> {
    rows.iter().flat_map(|r| r.vars().collect::<Vec<_>>()).collect()
}

/// Eliminates `v` from normalized rows. `None` means infeasible, `Some(None)`
/// means the row budget was exhausted.
#[allow(clippy::option_option)]
fn eliminate(rows: Vec<Row>, v: Var) -> Option<Option<Vec<Row>>> {
    // An equality mentioning v is used as a definition.
    let eq_pos = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.kind == Kind::Eq && r.mentions(v))
        .min_by_key(|(_, r)| r.expr.coeff(v).map(|c| c.abs()))
        .map(|(i, _)| i);
    if let Some(i) = eq_pos {
        let mut rows = rows;
        let def = rows.swap_remove(i);
        let a = def.expr.coeff(v).cloned().expect("mentions v");
        let out = if a.abs().is_one() {
            // v = -(rest)/a
            let rest = def.expr.sub(&LinExpr::term(a.clone(), v));
            let with = rest.scale(&-&a);
            rows.into_iter().map(|r| r.substitute(v, &with)).collect::<Vec<_>>()
        } else {
            let (a, def_e) = if a.is_negative() {
                (-a, def.expr.neg())
            } else {
                (a, def.expr.clone())
            };
            rows.into_iter()
                .map(|r| match r.expr.coeff(v).cloned() {
                    None => r,
                    Some(b) => Row {
                        expr: r.expr.scale(&a).sub(&def_e.scale(&b)),
                        kind: r.kind,
                    },
                })
                .collect()
        };
        return normalize_all(out).map(Some);
    }
    let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
    for r in rows {
        match r.expr.coeff(v) {
            Some(c) if c.is_positive() => pos.push(r),
            Some(_) => neg.push(r),
            None => rest.push(r),
        }
    }
    if rest.len() + pos.len() * neg.len() > ROW_LIMIT {
        return Some(None);
    }
    for p in &pos {
        let a = p.expr.coeff(v).expect("positive");
        for n in &neg {
            let b = -n.expr.coeff(v).expect("negative");
            rest.push(Row::le(p.expr.scale(&b).add(&n.expr.scale(a))));
        }
    }
    normalize_all(rest).map(Some)
}

/// Picks the variable whose elimination creates the fewest rows.
fn pick(rows: &[Row], vars: &BTreeSet<Var>) -> Option<Var> {
    let mut count: BTreeMap<Var, (usize, usize, bool)> = BTreeMap::new();
    for r in rows {
        for (v, c) in r.expr.coeffs() {
            if !vars.contains(v) {
                continue;
            }
            let e = count.entry(*v).or_default();
            if r.kind == Kind::Eq {
                e.2 = true;
            } else if c.is_positive() {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    count
        .into_iter()
        .min_by_key(|(_, (p, n, eq))| if *eq { 0 } else { p * n + 1 })
        .map(|(v, _)| v)
}

pub enum Projection {
    Infeasible,
    Rows(Vec<Row>),
    /// Too large to decide; treated as satisfiable with no information.
    GaveUp,
}

/// Eliminates every variable outside `keep`.
pub fn project(rows: &[Row], keep: &BTreeSet<Var>) -> Projection {
    let Some(mut rows) = normalize_all(rows.iter().cloned()) else {
        return Projection::Infeasible;
    };
    loop {
        let drop: BTreeSet<Var> = all_vars(&rows).difference(keep).copied().collect();
        let Some(v) = pick(&rows, &drop) else {
            return Projection::Rows(rows);
        };
        match eliminate(rows, v) {
            None => return Projection::Infeasible,
            Some(None) => return Projection::GaveUp,
            Some(Some(r)) => rows = r,
        }
    }
}

/// Rational relaxation with tightening.
pub fn relaxed_satisfiable(rows: &[Row]) -> bool {
    !matches!(project(rows, &BTreeSet::new()), Projection::Infeasible)
}

/// Integer bounds of `v` implied by the projection onto `v`.
pub fn bounds(rows: &[Row], v: Var) -> Option<(Option<BigInt>, Option<BigInt>)> {
    let keep: BTreeSet<Var> = [v].into_iter().collect();
    let rows = match project(rows, &keep) {
        Projection::Infeasible => return None,
        Projection::GaveUp => return Some((None, None)),
        Projection::Rows(r) => r,
    };
    let (mut lo, mut hi): (Option<BigInt>, Option<BigInt>) = (None, None);
    for r in rows {
        let Some(c) = r.expr.coeff(v) else { continue };
        let k = r.expr.constant_part();
        // c·v + k (≤|=) 0
        let upper = floor_div(&-k, c);
        let lower = ceil_div(&-k, c);
        if r.kind == Kind::Eq || c.is_positive() {
            let b = if c.is_positive() { upper.clone() } else { lower.clone() };
            hi = Some(hi.map_or(b.clone(), |h| h.min(b)));
        }
        if r.kind == Kind::Eq || c.is_negative() {
            let b = if c.is_negative() { upper } else { lower };
            lo = Some(lo.map_or(b.clone(), |l| l.max(b)));
        }
    }
    Some((lo, hi))
}

/// Integer satisfiability. Exact whenever some variable is bounded within
/// the enumeration limit at each branching point; otherwise the tightened
/// rational verdict is returned.
pub fn satisfiable(rows: &[Row]) -> bool {
    let Some(rows) = normalize_all(rows.iter().cloned()) else {
        return false;
    };
    sat_rec(rows)
}

/// Drops rows that some variable occurring in no other row can always
/// satisfy: any inequality, or an equality where its coefficient is ±1.
/// Integer satisfiability is unchanged.
pub fn drop_unconstrained(mut rows: Vec<Row>) -> Vec<Row> {
    loop {
        let mut uses: BTreeMap<Var, usize> = BTreeMap::new();
        for r in &rows {
            for v in r.vars() {
                *uses.entry(v).or_default() += 1;
            }
        }
        let before = rows.len();
        rows.retain(|r| {
            !r.expr.coeffs().iter().any(|(v, c)| {
                uses[v] == 1 && (r.kind == Kind::Le || c.abs().is_one())
            })
        });
        if rows.len() == before {
            return rows;
        }
    }
}

fn sat_rec(rows: Vec<Row>) -> bool {
    let rows = drop_unconstrained(rows);
    if !relaxed_satisfiable(&rows) {
        return false;
    }
    let vars = all_vars(&rows);
    if vars.is_empty() {
        return true;
    }
    let mut best: Option<(Var, BigInt, u64)> = None;
    for v in vars {
        match bounds(&rows, v) {
            None => return false,
            Some((Some(lo), Some(hi))) => {
                if hi < lo {
                    return false;
                }
                let size = (&hi - &lo).to_u64().unwrap_or(u64::MAX).saturating_add(1);
                if best.as_ref().is_none_or(|b| size < b.2) {
                    best = Some((v, lo, size));
                }
            }
            _ => {}
        }
    }
    let Some((v, lo, size)) = best else {
        return true;
    };
    if size > ENUM_LIMIT {
        return true;
    }
    let mut val = lo;
    for _ in 0..size {
        let with = LinExpr::constant(val.clone());
        let next = normalize_all(rows.iter().map(|r| r.substitute(v, &with)));
        if let Some(next) = next {
            if sat_rec(next) {
                return true;
            }
        }
        val += 1;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> LinExpr {
        LinExpr::var(Var(0))
    }
    fn y() -> LinExpr {
        LinExpr::var(Var(1))
    }
    fn k(i: i64) -> LinExpr {
        LinExpr::constant(i)
    }

    #[test]
    fn tightening() {
        // 2x - 3 ≤ 0  ⇒  x - 1 ≤ 0
        let r = Row::le(x().scale(&BigInt::from(2)).add(&k(-3))).normalize();
        assert_eq!(r, Norm::Row(Row::le(x().add(&k(-1)))));
        // 2x = 3 has no integer solution
        assert_eq!(Row::eq(x().scale(&BigInt::from(2)).add(&k(-3))).normalize(), Norm::False);
        assert_eq!(Row::le(k(0)).normalize(), Norm::True);
        assert_eq!(Row::le(k(1)).normalize(), Norm::False);
    }

    #[test]
    fn simple_systems() {
        // x > 2, x < 2
        let rows = vec![Row::le(k(3).sub(&x())), Row::le(x().add(&k(-1)))];
        assert!(!satisfiable(&rows));
        assert!(satisfiable(&rows[..1]));
        // 1 ≤ 2x - 2y ≤ 1 is infeasible over the integers only
        let d = x().sub(&y()).scale(&BigInt::from(2));
        let rows = vec![Row::le(k(1).sub(&d)), Row::le(d.add(&k(-1)))];
        assert!(!satisfiable(&rows));
    }

    #[test]
    fn parity_needs_enumeration() {
        // x = 2y + 1, x = 2z, 0 ≤ x ≤ 10: no integer solution
        let z = LinExpr::var(Var(2));
        let two = BigInt::from(2);
        let rows = vec![
            Row::eq(x().sub(&y().scale(&two)).add(&k(-1))),
            Row::eq(x().sub(&z.scale(&two))),
            Row::le(x().neg()),
            Row::le(x().add(&k(-10))),
        ];
        assert!(!satisfiable(&rows));
    }

    #[test]
    fn bounds_of_projection() {
        // x + y ≤ 4, y ≥ 1, x ≥ 0
        let rows = vec![
            Row::le(x().add(&y()).add(&k(-4))),
            Row::le(k(1).sub(&y())),
            Row::le(x().neg()),
        ];
        let (lo, hi) = bounds(&rows, Var(0)).unwrap();
        assert_eq!(lo, Some(BigInt::from(0)));
        assert_eq!(hi, Some(BigInt::from(3)));
    }
}
