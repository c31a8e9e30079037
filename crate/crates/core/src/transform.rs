//! Unfolding of a recursive rule with itself, the rule ladder built by
//! repeating it, and the program variants assembled from the ladder.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::program::{Atom, Program, Rule};
use crate::simplify::{simplify_rule, SimplifyReport};
use crate::syntax::generated_name;
use crate::term::{match_into, Subst, Symbol, Term, Var, VarSupply};
use crate::theory::{diff, Builtin, Store, TheoryError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum UnfoldError {
    #[error("rule {0} has no recursive call")]
    NoRecursiveCall(String),
    #[error("rule {rule} has {count} recursive calls; only a single self-call can be unfolded")]
    MultipleRecursiveCalls { rule: String, count: usize },
    #[error("condition (1) fails: {call} is not an instance of the head {head}")]
    NotAnInstance { call: String, head: String },
    #[error("condition (2) fails: {vars} shared between the inherited guard and the instantiated head do not occur in the head")]
    SharedGuardVars { vars: String },
    #[error("condition (3) fails: the unfolded guard is unsatisfiable")]
    UnsatisfiableGuard,
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

impl UnfoldError {
    /// The side condition of the unfolding definition that failed, if any.
    pub fn condition(&self) -> Option<u8> {
        match self {
            UnfoldError::NotAnInstance { .. } => Some(1),
            UnfoldError::SharedGuardVars { .. } => Some(2),
            UnfoldError::UnsatisfiableGuard => Some(3),
            _ => None,
        }
    }
}

fn show(t: &Term, names: &BTreeMap<Var, String>) -> String {
    let mut s = String::new();
    let _ = crate::syntax::write_term(&mut s, t, &|v| names.get(&v).cloned().unwrap_or_else(|| v.to_string()));
    s
}

/// Index of the single body call to `key`.
fn recursive_call(r: &Rule, key: &(Symbol, usize)) -> Result<usize, UnfoldError> {
    let idx: Vec<usize> = r
        .body
        .iter()
        .enumerate()
        .filter(|(_, a)| {
            a.as_call()
                .and_then(Term::functor)
                .is_some_and(|(f, n)| *f == key.0 && n == key.1)
        })
        .map(|(i, _)| i)
        .collect();
    match idx[..] {
        [] => Err(UnfoldError::NoRecursiveCall(r.name.to_string())),
        [i] => Ok(i),
        _ => Err(UnfoldError::MultipleRecursiveCalls {
            rule: r.name.to_string(),
            count: idx.len(),
        }),
    }
}

fn flat_name(t: &Term, r: &Rule) -> String {
    let tail = t.list_parts().1;
    match tail.as_var().and_then(|v| r.name_of(v)) {
        Some(n) => format!("{n}'"),
        None => "X".to_string(),
    }
}

/// Replaces the head arguments at `positions` that are not variables by
/// fresh variables, each bound by a guard equality placed before the guard.
pub fn flatten_positions(r: &Rule, positions: &[usize], supply: &mut VarSupply) -> Rule {
    supply.reserve(r.vars());
    let Some((f, args)) = r.head.as_app() else {
        return r.clone();
    };
    let mut out = r.clone();
    let mut args = args.to_vec();
    let mut eqs = Vec::new();
    for &i in positions {
        if i >= args.len() || args[i].as_var().is_some() {
            continue;
        }
        let v = supply.fresh();
        out.names.insert(v, flat_name(&args[i], r));
        eqs.push(Builtin::TermEq(Term::Var(v), args[i].clone()));
        args[i] = Term::Var(v);
    }
    out.head = Term::app(f.clone(), args);
    eqs.extend(out.guard);
    out.guard = eqs;
    out
}

/// Moves every non-variable head argument into the guard:
/// `r([C|A],D) <=> …` becomes `r(X,D) <=> X=[C|A] | …`.
pub fn flatten_head(r: &Rule, supply: &mut VarSupply) -> Rule {
    let n = r.head.functor().map_or(0, |(_, n)| n);
    flatten_positions(r, &(0..n).collect::<Vec<_>>(), supply)
}

/// `unfold(r,v)`: replaces the recursive call `S` in the body of `r` by
/// `S=H'` and the body of `v`, adding the part of `v`'s guard not implied by
/// the guard and body built-ins of `r`. `v` is renamed apart first.
pub fn unfold(r: &Rule, v: &Rule, supply: &mut VarSupply) -> Result<Rule, UnfoldError> {
    supply.reserve(r.vars());
    supply.reserve(v.vars());
    let v = v.rename_apart(supply);
    let key = v.key();
    let at = recursive_call(r, &key)?;
    let s = r.body[at].as_call().expect("call").clone();

    let mut context: Vec<Builtin> = r.guard.clone();
    context.extend(r.body_builtins().cloned());
    let store = Store::normalize(&context)?;

    // (1) S must be an instance of H' in the context of C ∧ D
    let mut theta = Subst::new();
    if !match_into(&v.head, &store.resolve(&s), &mut theta) {
        let mut names = r.names.clone();
        names.extend(v.names.clone());
        return Err(UnfoldError::NotAnInstance {
            call: show(&s, &names),
            head: show(&v.head, &names),
        });
    }
    let inherited: Vec<Builtin> = v.guard.iter().map(|g| g.apply(&theta)).collect::<Result<_, _>>()?;
    let residual = diff(&inherited, &store);

    // (2) vars(C''θ) ∩ vars(H'θ) ⊆ vars(H)
    let head_vars = r.head_vars();
    let inst_head = theta.apply(&v.head).vars();
    let mut shared = BTreeSet::new();
    for g in &residual {
        g.collect_vars(&mut shared);
    }
    let bad: Vec<Var> = shared
        .intersection(&inst_head)
        .filter(|x| !head_vars.contains(x))
        .copied()
        .collect();
    if !bad.is_empty() {
        let names = r.names.clone();
        return Err(UnfoldError::SharedGuardVars {
            vars: bad
                .iter()
                .map(|x| names.get(x).cloned().unwrap_or_else(|| x.to_string()))
                .collect::<Vec<_>>()
                .join(", "),
        });
    }

    // (3) ∃(C ∧ C''θ)
    let mut guard = r.guard.clone();
    guard.extend(residual);
    let check = Store::normalize(&guard)?;
    if check.is_inconsistent() || !check.satisfiable() {
        return Err(UnfoldError::UnsatisfiableGuard);
    }

    let mut body = r.body[..at].to_vec();
    body.push(Atom::Builtin(Builtin::TermEq(s, v.head.clone())));
    body.extend(v.body.iter().cloned());
    body.extend(r.body[at + 1..].iter().cloned());
    let mut names = r.names.clone();
    names.extend(v.names);
    Ok(Rule {
        name: r.name.clone(),
        head: r.head.clone(),
        guard,
        body,
        names,
    })
}

/// Head positions of `v` whose argument does not match the recursive call
/// of `r` on its own.
fn blocking_positions(r: &Rule) -> Vec<usize> {
    let Ok(at) = recursive_call(r, &r.key()) else {
        return Vec::new();
    };
    let call = r.body[at].as_call().expect("call");
    let (Some((_, hargs)), Some((_, cargs))) = (r.head.as_app(), call.as_app()) else {
        return Vec::new();
    };
    hargs
        .iter()
        .zip(cargs)
        .enumerate()
        .filter(|(_, (h, c))| h.as_var().is_none() && !match_into(h, c, &mut Subst::new()))
        .map(|(i, _)| i)
        .collect()
}

/// Unfolds `r` with a copy of itself. When the recursive call is not an
/// instance of the head, the copy's blocking head arguments are flattened
/// first. Returns the unfolded rule and whether flattening was needed.
pub fn unfold_self(r: &Rule) -> Result<(Rule, bool), UnfoldError> {
    let mut supply = VarSupply::avoiding(r.vars());
    match unfold(r, r, &mut supply) {
        Err(UnfoldError::NotAnInstance { .. }) => {
            let mut positions = blocking_positions(r);
            if positions.is_empty() {
                positions = (0..r.head.functor().map_or(0, |(_, n)| n)).collect();
            }
            let flat = flatten_positions(r, &positions, &mut supply);
            unfold(r, &flat, &mut supply).map(|u| (u, true))
        }
        other => other.map(|u| (u, false)),
    }
}

/// Replaces print hints by clean names: hints without primes when that
/// keeps them distinct, otherwise letters by first occurrence in the body.
pub fn tidy_names(r: &Rule) -> Rule {
    let vars = r.vars();
    let stripped: Vec<Option<String>> = vars
        .iter()
        .map(|v| r.name_of(*v).map(|n| n.trim_end_matches('\'').to_string()))
        .collect();
    let distinct: HashSet<&String> = stripped.iter().flatten().collect();
    let mut out = r.clone();
    if stripped.iter().all(Option::is_some) && distinct.len() == vars.len() {
        out.names = vars.iter().copied().zip(stripped.into_iter().flatten()).collect();
        return out;
    }
    let mut order: Vec<Var> = Vec::new();
    let mut seen = HashSet::new();
    let mut add = |v: Var| {
        if seen.insert(v) {
            order.push(v);
        }
    };
    for a in &r.body {
        match a {
            Atom::Call(t) => t.visit_vars(&mut add),
            Atom::Append { args, .. } => args.iter().for_each(|t| t.visit_vars(&mut add)),
            Atom::Builtin(b) => b.vars().into_iter().for_each(&mut add),
        }
    }
    r.head.visit_vars(&mut add);
    for g in &r.guard {
        g.vars().into_iter().for_each(&mut add);
    }
    out.names = order.iter().enumerate().map(|(i, v)| (*v, generated_name(i))).collect();
    out
}

#[derive(Clone, Debug)]
pub struct Level {
    /// `i` of `r_i`.
    pub index: usize,
    /// `unfold(r_{i-1})` before simplification.
    pub raw: Rule,
    pub rule: Rule,
    pub report: SimplifyReport,
    pub flattened: bool,
}

#[derive(Clone, Debug)]
pub struct UnfoldLadder {
    pub base: Rule,
    pub levels: Vec<Level>,
    /// Set when unfolding stopped before the requested level.
    pub warning: Option<String>,
}

impl UnfoldLadder {
    /// `r_0, r_1, …, r_k`.
    pub fn rules(&self) -> Vec<&Rule> {
        std::iter::once(&self.base).chain(self.levels.iter().map(|l| &l.rule)).collect()
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level_of(&self, name: &str) -> Option<usize> {
        if self.base.name.as_str() == name {
            return Some(0);
        }
        self.levels.iter().find(|l| l.rule.name.as_str() == name).map(|l| l.index)
    }

    /// Recursive steps of `r_0` covered by one application of `r_i`.
    pub fn coverage(i: usize) -> u128 {
        1u128 << i
    }

    pub fn symbol(&self) -> Symbol {
        self.base.symbol().clone()
    }
}

/// `⌊log₂ n⌋` for `n ≥ 1`.
pub fn floor_log2(n: u64) -> usize {
    (63 - n.max(1).leading_zeros()) as usize
}

/// `r_0 = r`, `r_{i+1} = simplify(unfold(r_i))` for `i < levels`. Stops early
/// with a warning when an unfolding fails; the error is returned only when
/// the very first unfolding is impossible for structural reasons.
pub fn repeated_unfold(r0: &Rule, levels: usize) -> Result<UnfoldLadder, UnfoldError> {
    let sym = r0.symbol().to_string();
    let mut ladder = UnfoldLadder {
        base: r0.clone(),
        levels: Vec::new(),
        warning: None,
    };
    recursive_call(r0, &r0.key())?;
    let mut cur = tidy_names(r0);
    for i in 1..=levels {
        let (raw, flattened) = match unfold_self(&cur) {
            Ok(u) => u,
            Err(e) => {
                ladder.warning = Some(format!("unfolding stopped at level {i}: {e}"));
                break;
            }
        };
        let (mut rule, report) = simplify_rule(&raw);
        rule.name = Symbol::new(&format!("{sym}_r{i}"));
        let rule = tidy_names(&rule);
        let mut raw = raw;
        raw.name = rule.name.clone();
        ladder.levels.push(Level {
            index: i,
            raw,
            rule: rule.clone(),
            report,
            flattened,
        });
        cur = rule;
    }
    Ok(ladder)
}

fn position_of(p: &Program, name: &Symbol) -> Option<usize> {
    p.rules().iter().position(|r| r.name == *name)
}

/// `r_k, …, r_1, r_0`, then the other rules of the same constraint, placed
/// where the constraint's first rule was; other rules keep their order.
pub fn assemble_rule_order(p: &Program, ladder: &UnfoldLadder) -> Program {
    let key = ladder.base.key();
    let Some(first) = p.rules().iter().position(|r| r.key() == key) else {
        return p.clone();
    };
    let mut block: Vec<Rule> = ladder.levels.iter().rev().map(|l| l.rule.clone()).collect();
    block.push(ladder.base.clone());
    block.extend(
        p.rules()
            .iter()
            .filter(|r| r.key() == key && r.name != ladder.base.name)
            .cloned(),
    );
    let mut out = Vec::new();
    for (i, r) in p.rules().iter().enumerate() {
        if i == first {
            out.append(&mut block);
        }
        if r.key() != key {
            out.push(r.clone());
        }
    }
    Program::new(out)
}

fn level_symbol(sym: &str, i: usize) -> Symbol {
    Symbol::new(&format!("{sym}_{i}"))
}

fn retarget_head(r: &Rule, to: &Symbol) -> Rule {
    let mut out = r.clone();
    if let Some((_, args)) = r.head.as_app() {
        out.head = Term::app(to.clone(), args.to_vec());
    }
    out
}

fn retarget_call(r: &Rule, key: &(Symbol, usize), to: &Symbol) -> Rule {
    let mut out = r.clone();
    if let Ok(at) = recursive_call(r, key) {
        let (_, args) = r.body[at].as_call().and_then(Term::as_app).expect("call");
        out.body[at] = Atom::Call(Term::app(to.clone(), args.to_vec()));
    }
    out
}

/// `c_i(X1..Xn) <=> c_{i-1}(X1..Xn)` with the base rule's head names where
/// they are plain variables.
fn fall_through(base: &Rule, name: &str, from: &Symbol, to: &Symbol) -> Rule {
    let arity = base.key().1;
    let hint_args: Option<Vec<Var>> = base
        .head
        .as_app()
        .map(|(_, a)| a.iter().filter_map(Term::as_var).collect())
        .filter(|vs: &Vec<Var>| vs.len() == arity && vs.iter().collect::<HashSet<_>>().len() == arity);
    let vars: Vec<Var> = (0..arity as u32).map(Var).collect();
    let names: BTreeMap<Var, String> = match &hint_args {
        Some(hs) if hs.iter().all(|v| base.name_of(*v).is_some()) => vars
            .iter()
            .zip(hs)
            .map(|(v, h)| (*v, base.name_of(*h).expect("hint").trim_end_matches('\'').to_string()))
            .collect(),
        _ => vars.iter().enumerate().map(|(i, v)| (*v, generated_name(i))).collect(),
    };
    let args: Vec<Term> = vars.iter().map(|v| Term::Var(*v)).collect();
    Rule {
        name: Symbol::new(name),
        head: Term::app(from.clone(), args.clone()),
        guard: Vec::new(),
        body: vec![Atom::Call(Term::app(to.clone(), args))],
        names,
    }
}

/// Recursionless recursion: level `i` becomes constraint `c_i` calling
/// `c_{i-1}`, with a fall-through rule after it; `r_0` calls `c`, which is
/// left with the base rules only. Queries call `c_k`.
pub fn recursionless(p: &Program, ladder: &UnfoldLadder) -> Program {
    let key = ladder.base.key();
    let sym = key.0.to_string();
    let Some(first) = p.rules().iter().position(|r| r.key() == key) else {
        return p.clone();
    };
    let mut block = Vec::new();
    for (i, r) in ladder.rules().into_iter().enumerate().rev() {
        let own = level_symbol(&sym, i);
        let below = if i == 0 { key.0.clone() } else { level_symbol(&sym, i - 1) };
        let mut rule = retarget_call(&retarget_head(r, &own), &key, &below);
        rule.name = Symbol::new(&format!("{sym}_r{i}"));
        block.push(rule);
        block.push(fall_through(&ladder.base, &format!("{sym}_f{i}"), &own, &below));
    }
    block.extend(
        p.rules()
            .iter()
            .filter(|r| r.key() == key && r.name != ladder.base.name)
            .cloned(),
    );
    let mut out = Vec::new();
    for (i, r) in p.rules().iter().enumerate() {
        if i == first {
            out.append(&mut block);
        }
        if r.key() != key {
            out.push(r.clone());
        }
    }
    Program::new(out)
}

/// Adds a copy of the top rule `r_k` calling `c_k` itself in front of it,
/// so that depths beyond the bound are handled by repeating `r_k`.
pub fn unbounded_cap(p: &Program, ladder: &UnfoldLadder) -> Program {
    let sym = ladder.base.symbol().to_string();
    let k = ladder.depth();
    let top = level_symbol(&sym, k);
    let below = if k == 0 { ladder.base.symbol().clone() } else { level_symbol(&sym, k - 1) };
    let arity = ladder.base.key().1;
    let Some(at) = position_of(p, &Symbol::new(&format!("{sym}_r{k}"))) else {
        return p.clone();
    };
    let mut cap = retarget_call(&p.rules()[at], &(below, arity), &top);
    cap.name = Symbol::new(&format!("{sym}_cap"));
    let mut rules = p.rules().to_vec();
    rules.insert(at, cap);
    Program::new(rules)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    RuleOrder,
    Recursionless,
    Unbounded,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::RuleOrder => "rule-order",
            Mode::Recursionless => "recursionless",
            Mode::Unbounded => "unbounded",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "rule-order" => Ok(Mode::RuleOrder),
            "recursionless" => Ok(Mode::Recursionless),
            "unbounded" => Ok(Mode::Unbounded),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TransformConfig {
    /// Rule to unfold; the first recursive rule when absent.
    pub target_rule: Option<String>,
    /// Upper bound `N` on the recursion depth; `⌊log₂ N⌋` levels.
    pub bound: u64,
    /// Overrides the number of levels derived from `bound`.
    pub levels: Option<usize>,
    pub mode: Mode,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            target_rule: None,
            bound: 2,
            levels: None,
            mode: Mode::RuleOrder,
        }
    }
}

impl TransformConfig {
    pub fn with_levels(levels: usize, mode: Mode) -> Self {
        TransformConfig {
            levels: Some(levels),
            bound: 1u64 << levels.min(63),
            mode,
            ..Self::default()
        }
    }

    pub fn with_bound(bound: u64, mode: Mode) -> Self {
        TransformConfig {
            bound,
            mode,
            ..Self::default()
        }
    }

    pub fn level_count(&self) -> usize {
        self.levels.unwrap_or_else(|| floor_log2(self.bound))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("no rule named {0}")]
    UnknownRule(String),
    #[error("no recursive rule to unfold")]
    NoRecursiveRule,
    #[error("bound must be at least 2, got {0}")]
    BadBound(u64),
    #[error(transparent)]
    Unfold(#[from] UnfoldError),
}

#[derive(Clone, Debug)]
pub struct TransformReport {
    pub ladder: UnfoldLadder,
    pub program: Program,
    pub mode: Mode,
    /// Constraint that queries should call: `c` for rule order, `c_k`
    /// otherwise.
    pub entry: Symbol,
}

impl TransformReport {
    /// Rewrites a query's calls of the original constraint to the entry.
    pub fn retarget_goal(&self, goal: &[Atom]) -> Vec<Atom> {
        let key = self.ladder.base.key();
        goal.iter()
            .map(|a| match a.as_call().and_then(Term::as_app) {
                Some((f, args)) if *f == key.0 && args.len() == key.1 => {
                    Atom::Call(Term::app(self.entry.clone(), args.to_vec()))
                }
                _ => a.clone(),
            })
            .collect()
    }
}

pub fn select_rule<'p>(p: &'p Program, name: Option<&str>) -> Result<&'p Rule, TransformError> {
    match name {
        Some(n) => p.rule(n).ok_or_else(|| TransformError::UnknownRule(n.to_string())),
        None => (0..p.len())
            .find(|&i| p.is_recursive(i))
            .map(|i| &p.rules()[i])
            .ok_or(TransformError::NoRecursiveRule),
    }
}

pub fn transform(p: &Program, config: &TransformConfig) -> Result<TransformReport, TransformError> {
    if config.levels.is_none() && config.bound < 2 {
        return Err(TransformError::BadBound(config.bound));
    }
    let r0 = select_rule(p, config.target_rule.as_deref())?;
    let ladder = repeated_unfold(r0, config.level_count())?;
    let sym = ladder.symbol();
    let (program, entry) = match config.mode {
        Mode::RuleOrder => (assemble_rule_order(p, &ladder), sym),
        Mode::Recursionless => (recursionless(p, &ladder), level_symbol(sym.as_str(), ladder.depth())),
        Mode::Unbounded => (
            unbounded_cap(&recursionless(p, &ladder), &ladder),
            level_symbol(sym.as_str(), ladder.depth()),
        ),
    };
    Ok(TransformReport {
        ladder,
        program,
        mode: config.mode,
        entry,
    })
}

impl fmt::Display for UnfoldLadder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opts = crate::syntax::PrintOptions::default();
        writeln!(f, "% r0: {}", crate::syntax::print_rule(&self.base, &opts))?;
        for l in &self.levels {
            writeln!(f, "% level {} covers {} recursive steps", l.index, Self::coverage(l.index))?;
            if l.flattened {
                writeln!(f, "% head flattened before unfolding")?;
            }
            writeln!(f, "% unfolded: {}", crate::syntax::print_rule(&l.raw, &opts))?;
            for line in l.report.to_string().lines() {
                writeln!(f, "%{line}")?;
            }
        }
        if let Some(w) = &self.warning {
            writeln!(f, "% warning: {w}")?;
        }
        Ok(())
    }
}

/// Alpha-equivalence of two rules, ignoring names.
pub fn same_rule(a: &Rule, b: &Rule) -> bool {
    let (mut a, mut b) = (a.canonical(), b.canonical());
    a.name = Symbol::new("_");
    b.name = Symbol::new("_");
    a == b
}

/// Maps each variable to its position for quick structural comparisons.
pub fn variable_positions(r: &Rule) -> HashMap<Var, usize> {
    crate::syntax::occurrence_order(r).into_iter().enumerate().map(|(i, v)| (v, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, parse_rule, print_program, print_rule, PrintOptions};

    const SUM: &str = "sum(N,S) <=> N>1 | S := N+S1, sum(N-1,S1).\nsum(N,S) <=> N=1 | S=1.\n";
    const REV: &str = "r([C|A],D) <=> r(A,B), a(B,[C],D).\nr([],D) <=> D=[].\n";

    fn listing(r: &Rule) -> String {
        print_rule(r, &PrintOptions::listing())
    }

    #[test]
    fn sum_unfold_is_the_textbook_rule() {
        let p = parse_program(SUM).unwrap();
        let r = &p.rules()[0];
        let mut supply = VarSupply::avoiding(r.vars());
        let u = unfold(r, r, &mut supply).unwrap();
        assert_eq!(
            listing(&u),
            "sum(N,S) <=> N>1, N-1>1 | S := N+S1, sum(N-1,S1)=sum(N',S'), S' := N'+S1', sum(N'-1,S1')."
        );
    }

    #[test]
    fn sum_ladder() {
        let p = parse_program(SUM).unwrap();
        let ladder = repeated_unfold(&p.rules()[0], 3).unwrap();
        let shown: Vec<String> = ladder.levels.iter().map(|l| listing(&l.rule)).collect();
        assert_eq!(
            shown,
            vec![
                "sum(N,S) <=> N>2 | S := 2*N-1+S1, sum(N-2,S1).",
                "sum(N,S) <=> N>4 | S := 4*N-6+S1, sum(N-4,S1).",
                "sum(N,S) <=> N>8 | S := 8*N-28+S1, sum(N-8,S1).",
            ]
        );
    }

    #[test]
    fn reversal_needs_flattening() {
        let p = parse_program(REV).unwrap();
        let r = &p.rules()[0];
        let mut supply = VarSupply::avoiding(r.vars());
        let e = unfold(r, r, &mut supply).unwrap_err();
        assert_eq!(e.condition(), Some(1));
        let flat = flatten_head(r, &mut supply);
        assert!(flat.head.as_app().unwrap().1[0].as_var().is_some());
        assert!(unfold(r, &flat, &mut supply).is_ok());
    }

    #[test]
    fn reversal_ladder() {
        let p = parse_program(REV).unwrap();
        let ladder = repeated_unfold(&p.rules()[0], 3).unwrap();
        let shown: Vec<String> = ladder.levels.iter().map(|l| listing(&l.rule)).collect();
        assert_eq!(
            shown,
            vec![
                "r([D,C|A],E) <=> r(A,B), a(B,[C,D],E).",
                "r([F,E,D,C|A],G) <=> r(A,B), a(B,[C,D,E,F],G).",
                "r([J,I,H,G,F,E,D,C|A],K) <=> r(A,B), a(B,[C,D,E,F,G,H,I,J],K).",
            ]
        );
    }

    #[test]
    fn recursionless_sum() {
        let p = parse_program(SUM).unwrap();
        let report = transform(&p, &TransformConfig::with_levels(2, Mode::Recursionless)).unwrap();
        assert_eq!(report.entry.as_str(), "sum_2");
        assert_eq!(
            print_program(&report.program, &PrintOptions::default()),
            "sum_r2: sum_2(N,S) <=> N>4 | S := 4*N-6+S1, sum_1(N-4,S1).\n\
             sum_f2: sum_2(N,S) <=> sum_1(N,S).\n\
             sum_r1: sum_1(N,S) <=> N>2 | S := 2*N-1+S1, sum_0(N-2,S1).\n\
             sum_f1: sum_1(N,S) <=> sum_0(N,S).\n\
             sum_r0: sum_0(N,S) <=> N>1 | S := N+S1, sum(N-1,S1).\n\
             sum_f0: sum_0(N,S) <=> sum(N,S).\n\
             rule2: sum(N,S) <=> N=1 | S=1.\n"
        );
    }

    #[test]
    fn cap_goes_before_top_rule() {
        let p = parse_program(SUM).unwrap();
        let report = transform(&p, &TransformConfig::with_levels(2, Mode::Unbounded)).unwrap();
        let first = &report.program.rules()[0];
        assert_eq!(
            print_rule(first, &PrintOptions::default()),
            "sum_cap: sum_2(N,S) <=> N>4 | S := 4*N-6+S1, sum_2(N-4,S1)."
        );
        assert_eq!(report.program.len(), 8);
    }

    #[test]
    fn rule_order_program() {
        let p = parse_program(SUM).unwrap();
        let report = transform(&p, &TransformConfig::with_bound(9, Mode::RuleOrder)).unwrap();
        assert_eq!(report.program.len(), 5);
        assert_eq!(report.program.rules()[0].name.as_str(), "sum_r3");
        let empty = UnfoldLadder {
            base: p.rules()[0].clone(),
            levels: Vec::new(),
            warning: None,
        };
        assert_eq!(assemble_rule_order(&p, &empty), p);
    }

    #[test]
    fn flatten_leaves_variable_heads() {
        let r = parse_rule("sum(N,S) <=> N>1 | S := N+S1, sum(N-1,S1).").unwrap();
        let mut supply = VarSupply::avoiding(r.vars());
        assert_eq!(flatten_head(&r, &mut supply), r);
    }

    #[test]
    fn multiple_calls_rejected() {
        let r = parse_rule("f(N,S) <=> N>1 | f(N-1,A), f(N-2,B), S := A+B.").unwrap();
        assert!(matches!(
            unfold_self(&r),
            Err(UnfoldError::MultipleRecursiveCalls { count: 2, .. })
        ));
    }
}
