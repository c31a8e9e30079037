use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write};

use num_traits::Signed;

use crate::program::{Atom, Program, Rule};
use crate::term::{Term, Var};
use crate::theory::{Builtin, LinExpr};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Naming {
    /// Source names where known (primes dropped when unambiguous).
    #[default]
    Hints,
    /// `A`..`Z`, `A1`..`Z1`, … in order of first occurrence.
    Generated,
}

#[derive(Clone, Debug)]
pub struct PrintOptions {
    pub naming: Naming,
    pub rule_names: bool,
}

impl Default for PrintOptions {
    fn default() -> Self {
        PrintOptions {
            naming: Naming::Hints,
            rule_names: true,
        }
    }
}

impl PrintOptions {
    /// Bare listing without rule names.
    pub fn listing() -> Self {
        PrintOptions {
            naming: Naming::Hints,
            rule_names: false,
        }
    }
}

/// How linear expressions inside a rule are laid out: variables in `order`,
/// the constant after the first `head` of them that occur.
pub struct ArithLayout<'a> {
    pub order: &'a [Var],
    pub head: &'a BTreeSet<Var>,
}

const PREC_ADD: u8 = 2;
const PREC_MUL: u8 = 1;
const PREC_ATOM: u8 = 0;

fn prec(t: &Term) -> u8 {
    match t.as_app() {
        Some((f, args)) if t.is_arith() => match (f.as_str(), args.len()) {
            ("*", 2) => PREC_MUL,
            ("-", 1) => PREC_MUL,
            _ => PREC_ADD,
        },
        _ => match t {
            Term::Int(i) if i.is_negative() => PREC_MUL,
            _ => PREC_ATOM,
        },
    }
}

pub fn is_plain_atom(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn write_functor<W: Write + ?Sized>(f: &mut W, name: &str) -> fmt::Result {
    if is_plain_atom(name) {
        f.write_str(name)
    } else {
        write!(f, "'{}'", name.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

/// Writes a term with `name` supplying variable names.
pub fn write_term<W: Write + ?Sized>(f: &mut W, t: &Term, name: &dyn Fn(Var) -> String) -> fmt::Result {
    match t {
        Term::Var(v) => f.write_str(&name(*v)),
        Term::Int(i) => write!(f, "{i}"),
        Term::Nil => f.write_str("[]"),
        Term::Cons(_) => {
            let (elems, tail) = t.list_parts();
            f.write_char('[')?;
            for (i, e) in elems.iter().enumerate() {
                if i > 0 {
                    f.write_char(',')?;
                }
                write_term(f, e, name)?;
            }
            if !matches!(tail, Term::Nil) {
                f.write_char('|')?;
                write_term(f, tail, name)?;
            }
            f.write_char(']')
        }
        Term::App(_) => {
            let (func, args) = t.as_app().expect("app");
            if t.is_arith() {
                let p = prec(t);
                if args.len() == 1 {
                    f.write_char('-')?;
                    return write_operand(f, &args[0], p, true, name);
                }
                write_operand(f, &args[0], p, false, name)?;
                f.write_str(func.as_str())?;
                return write_operand(f, &args[1], p, true, name);
            }
            write_functor(f, func.as_str())?;
            if args.is_empty() {
                return Ok(());
            }
            f.write_char('(')?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_char(',')?;
                }
                write_term(f, a, name)?;
            }
            f.write_char(')')
        }
    }
}

fn write_operand<W: Write + ?Sized>(
    f: &mut W,
    t: &Term,
    parent: u8,
    right: bool,
    name: &dyn Fn(Var) -> String,
) -> fmt::Result {
    let p = prec(t);
    let negative_literal = matches!(t, Term::Int(i) if i.is_negative());
    let paren = if right { p >= parent && p > PREC_ATOM || negative_literal } else { p > parent };
    if paren {
        f.write_char('(')?;
        write_term(f, t, name)?;
        f.write_char(')')
    } else {
        write_term(f, t, name)
    }
}

fn lin_term(e: &LinExpr, layout: Option<&ArithLayout>) -> Term {
    match layout {
        Some(l) => {
            let at = e.vars().filter(|v| l.head.contains(v)).count();
            e.to_term_ordered(l.order, at)
        }
        None => e.to_term(),
    }
}

pub fn write_builtin<W: Write + ?Sized>(
    f: &mut W,
    b: &Builtin,
    name: &dyn Fn(Var) -> String,
    layout: Option<&ArithLayout>,
) -> fmt::Result {
    match b {
        Builtin::True => f.write_str("true"),
        Builtin::False => f.write_str("false"),
        Builtin::TermEq(a, c) => {
            write_term(f, a, name)?;
            f.write_char('=')?;
            write_term(f, c, name)
        }
        Builtin::LinCmp(rel, l, r) => {
            write_term(f, &lin_term(l, layout), name)?;
            f.write_str(rel.symbol())?;
            write_term(f, &lin_term(r, layout), name)
        }
        Builtin::Assign(v, e) => {
            f.write_str(&name(*v))?;
            f.write_str(" := ")?;
            write_term(f, &lin_term(e, layout), name)
        }
    }
}

pub fn write_atom<W: Write + ?Sized>(
    f: &mut W,
    a: &Atom,
    name: &dyn Fn(Var) -> String,
    layout: Option<&ArithLayout>,
) -> fmt::Result {
    match a {
        Atom::Call(t) => write_term(f, t, name),
        Atom::Builtin(b) => write_builtin(f, b, name, layout),
        Atom::Append { name: n, args } => {
            write_functor(f, n.as_str())?;
            f.write_char('(')?;
            for (i, t) in args.iter().enumerate() {
                if i > 0 {
                    f.write_char(',')?;
                }
                write_term(f, t, name)?;
            }
            f.write_char(')')
        }
    }
}

/// Variables of a rule in order of first textual occurrence.
pub fn occurrence_order(r: &Rule) -> Vec<Var> {
    let mut raw = Vec::new();
    r.head.visit_vars(&mut |v| raw.push(v));
    fn builtin(b: &Builtin, out: &mut Vec<Var>) {
        match b {
            Builtin::TermEq(a, c) => {
                a.visit_vars(&mut |v| out.push(v));
                c.visit_vars(&mut |v| out.push(v));
            }
            Builtin::Assign(v, e) => {
                out.push(*v);
                out.extend(e.vars());
            }
            Builtin::LinCmp(_, l, c) => out.extend(l.vars().chain(c.vars())),
            _ => {}
        }
    }
    for g in &r.guard {
        builtin(g, &mut raw);
    }
    for a in &r.body {
        match a {
            Atom::Builtin(b) => builtin(b, &mut raw),
            Atom::Call(t) => t.visit_vars(&mut |v| raw.push(v)),
            Atom::Append { args, .. } => {
                for t in args {
                    t.visit_vars(&mut |v| raw.push(v));
                }
            }
        }
    }
    let mut seen = HashSet::new();
    raw.retain(|v| seen.insert(*v));
    raw
}

/// `A`..`Z`, then `A1`..`Z1`, …
pub fn generated_name(i: usize) -> String {
    let letter = (b'A' + (i % 26) as u8) as char;
    match i / 26 {
        0 => letter.to_string(),
        n => format!("{letter}{n}"),
    }
}

/// Assigns distinct print names to the rule's variables.
pub fn variable_names(r: &Rule, naming: Naming) -> HashMap<Var, String> {
    let order = occurrence_order(r);
    let mut out = HashMap::new();
    let mut used: HashSet<String> = HashSet::new();
    if naming == Naming::Generated {
        for (i, v) in order.iter().enumerate() {
            out.insert(*v, generated_name(i));
        }
        return out;
    }
    // Hinted names are placed first, so that a stripped prime never steals
    // the name of a variable that was written that way in the source.
    let stripped = |v: Var| r.name_of(v).map(|n| n.trim_end_matches('\'').to_string());
    let mut counts: HashMap<String, usize> = HashMap::new();
    for v in &order {
        if let Some(s) = stripped(*v) {
            *counts.entry(s).or_default() += 1;
        }
    }
    for v in &order {
        let Some(hint) = r.name_of(*v) else { continue };
        let base = hint.trim_end_matches('\'');
        let candidates = [
            (counts[base] == 1).then(|| base.to_string()),
            Some(hint.to_string()),
        ];
        let chosen = candidates
            .into_iter()
            .flatten()
            .find(|c| !used.contains(c))
            .unwrap_or_else(|| {
                (2..)
                    .map(|i| format!("{base}{i}"))
                    .find(|c| !used.contains(c) && !counts.contains_key(c))
                    .expect("unbounded")
            });
        used.insert(chosen.clone());
        out.insert(*v, chosen);
    }
    let mut next = 0;
    for v in &order {
        if out.contains_key(v) {
            continue;
        }
        let name = loop {
            let n = generated_name(next);
            next += 1;
            if !used.contains(&n) && !counts.contains_key(&n) {
                break n;
            }
        };
        used.insert(name.clone());
        out.insert(*v, name);
    }
    out
}

pub fn print_rule(r: &Rule, opts: &PrintOptions) -> String {
    let names = variable_names(r, opts.naming);
    let name = |v: Var| names.get(&v).cloned().unwrap_or_else(|| v.to_string());
    let order = occurrence_order(r);
    let head = r.head_vars();
    let mut sorted: Vec<Var> = order.iter().filter(|v| head.contains(v)).copied().collect();
    sorted.extend(order.iter().filter(|v| !head.contains(v)).copied());
    let layout = ArithLayout {
        order: &sorted,
        head: &head,
    };
    let mut s = String::new();
    if opts.rule_names {
        let _ = write!(s, "{}: ", r.name);
    }
    let _ = write_term(&mut s, &r.head, &name);
    s.push_str(" <=> ");
    if !r.guard.is_empty() {
        for (i, g) in r.guard.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            let _ = write_builtin(&mut s, g, &name, Some(&layout));
        }
        s.push_str(" | ");
    }
    if r.body.is_empty() {
        s.push_str("true");
    }
    for (i, a) in r.body.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write_atom(&mut s, a, &name, Some(&layout));
    }
    s.push('.');
    s
}

pub fn print_program(p: &Program, opts: &PrintOptions) -> String {
    let mut s = String::new();
    for r in p.rules() {
        s.push_str(&print_rule(r, opts));
        s.push('\n');
    }
    s
}

/// Prints a goal with the given variable names.
pub fn print_goal(goal: &[Atom], names: &dyn Fn(Var) -> String) -> String {
    let mut s = String::new();
    for (i, a) in goal.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write_atom(&mut s, a, names, None);
    }
    s
}
