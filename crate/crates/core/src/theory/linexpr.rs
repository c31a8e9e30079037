use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::TheoryError;
use crate::term::{Term, Var};

/// Σ cᵢ·xᵢ + k over the integers. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinExpr {
    coeffs: BTreeMap<Var, BigInt>,
    constant: BigInt,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(k: impl Into<BigInt>) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: k.into(),
        }
    }

    pub fn var(v: Var) -> Self {
        Self::term(BigInt::one(), v)
    }

    pub fn term(c: impl Into<BigInt>, v: Var) -> Self {
        let mut e = Self::zero();
        e.add_term(c.into(), v);
        e
    }

    /// Linearizes an arithmetic term. Products are accepted only when one
    /// factor is constant.
    pub fn from_term(t: &Term) -> Result<LinExpr, TheoryError> {
        match t {
            Term::Var(v) => Ok(LinExpr::var(*v)),
            Term::Int(i) => Ok(LinExpr::constant(i.clone())),
            Term::App(_) if t.is_arith() => {
                let (f, args) = t.as_app().expect("arith term is an application");
                match (f.as_str(), args) {
                    ("-", [a]) => Ok(LinExpr::from_term(a)?.neg()),
                    ("+", [a, b]) => Ok(LinExpr::from_term(a)?.add(&LinExpr::from_term(b)?)),
                    ("-", [a, b]) => Ok(LinExpr::from_term(a)?.sub(&LinExpr::from_term(b)?)),
                    ("*", [a, b]) => {
                        let (a, b) = (LinExpr::from_term(a)?, LinExpr::from_term(b)?);
                        if let Some(k) = a.as_constant() {
                            Ok(b.scale(k))
                        } else if let Some(k) = b.as_constant() {
                            Ok(a.scale(k))
                        } else {
                            Err(TheoryError::NonLinear(format!("product of variables in {t}")))
                        }
                    }
                    _ => unreachable!(),
                }
            }
            _ => Err(TheoryError::NonLinear(format!(
                "non-arithmetic term {t} in arithmetic position"
            ))),
        }
    }

    /// Canonical term: variables in id order, constant last.
    pub fn to_term(&self) -> Term {
        let order: Vec<Var> = self.coeffs.keys().copied().collect();
        self.to_term_ordered(&order, order.len())
    }

    /// Builds a left-associated sum following `order` for the variables. The
    /// constant is inserted after the first `constant_at` variables.
    pub fn to_term_ordered(&self, order: &[Var], constant_at: usize) -> Term {
        let mut items: Vec<(BigInt, Option<Var>)> = Vec::new();
        let mut placed_const = false;
        let mut seen = 0;
        for v in order {
            if let Some(c) = self.coeffs.get(v) {
                if seen == constant_at && !placed_const {
                    if !self.constant.is_zero() {
                        items.push((self.constant.clone(), None));
                    }
                    placed_const = true;
                }
                items.push((c.clone(), Some(*v)));
                seen += 1;
            }
        }
        // Variables missing from `order` go last, in id order.
        for (v, c) in &self.coeffs {
            if !order.contains(v) {
                items.push((c.clone(), Some(*v)));
            }
        }
        if !placed_const && !self.constant.is_zero() {
            items.push((self.constant.clone(), None));
        }
        let mut acc: Option<Term> = None;
        for (c, v) in items {
            let neg = c.is_negative();
            let mag = c.abs();
            let unit = |m: BigInt, v: Option<Var>| match v {
                Some(v) if m.is_one() => Term::Var(v),
                Some(v) => Term::app("*", vec![Term::Int(m), Term::Var(v)]),
                None => Term::Int(m),
            };
            acc = Some(match acc {
                None if neg => match v {
                    None => Term::Int(c),
                    Some(_) => Term::app("-", vec![unit(mag, v)]),
                },
                None => unit(mag, v),
                Some(prev) if neg => Term::app("-", vec![prev, unit(mag, v)]),
                Some(prev) => Term::app("+", vec![prev, unit(mag, v)]),
            });
        }
        acc.unwrap_or_else(|| Term::int(0))
    }

    pub fn as_constant(&self) -> Option<&BigInt> {
        self.coeffs.is_empty().then_some(&self.constant)
    }

    pub fn constant_part(&self) -> &BigInt {
        &self.constant
    }

    pub fn coeff(&self, v: Var) -> Option<&BigInt> {
        self.coeffs.get(&v)
    }

    pub fn coeffs(&self) -> &BTreeMap<Var, BigInt> {
        &self.coeffs
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant.is_zero()
    }

    fn add_term(&mut self, c: BigInt, v: Var) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(v).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            out.add_term(c.clone(), *v);
        }
        out.constant += &other.constant;
        out
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LinExpr {
        self.scale(&-BigInt::one())
    }

    pub fn scale(&self, k: &BigInt) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn add_constant(&self, k: &BigInt) -> LinExpr {
        let mut out = self.clone();
        out.constant += k;
        out
    }

    /// Replaces variables for which `f` returns an expression.
    pub fn substitute(&self, f: &mut dyn FnMut(Var) -> Option<LinExpr>) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            match f(*v) {
                Some(e) => out = out.add(&e.scale(c)),
                None => out.add_term(c.clone(), *v),
            }
        }
        out
    }

    pub fn rename(&self, f: &mut dyn FnMut(Var) -> Var) -> LinExpr {
        self.substitute(&mut |v| Some(LinExpr::var(f(v))))
    }

    /// Evaluates when every variable has a value.
    pub fn eval(&self, value: &mut dyn FnMut(Var) -> Option<BigInt>) -> Option<BigInt> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * value(*v)?;
        }
        Some(acc)
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// Evaluates a ground arithmetic term.
pub fn eval_term(t: &Term) -> Option<BigInt> {
    match t {
        Term::Int(i) => Some(i.clone()),
        Term::App(_) if t.is_arith() => {
            let (f, args) = t.as_app()?;
            match (f.as_str(), args) {
                ("-", [a]) => Some(-eval_term(a)?),
                ("+", [a, b]) => Some(eval_term(a)? + eval_term(b)?),
                ("-", [a, b]) => Some(eval_term(a)? - eval_term(b)?),
                ("*", [a, b]) => Some(eval_term(a)? * eval_term(b)?),
                _ => None,
            }
        }
        _ => None,
    }
}
