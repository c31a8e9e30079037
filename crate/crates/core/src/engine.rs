//! Instrumented interpreter for single-headed simplification rules under the
//! refined semantics: leftmost goal first, rules in textual order, guards
//! checked by entailment against the built-in store.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::program::{Atom, Program, Rule};
use crate::syntax::Query;
use crate::term::{match_into, Subst, Term, Var, VarSupply};
use crate::theory::{eval_term, Builtin, Store, TheoryError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_steps: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_steps: 100_000_000 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub limits: Limits,
    pub trace: bool,
    /// Reject `X := e` when `e` is not ground at the time it is executed.
    pub strict_assign: bool,
}

impl RunOptions {
    pub fn traced() -> Self {
        RunOptions {
            trace: true,
            ..Self::default()
        }
    }
}

/// Counters of one run. Cost model: one unit per head-match attempt, per
/// told built-in and per evaluated call argument; an append costs the length
/// of its first argument.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    /// Rule tries that did not fire.
    pub rule_attempts: u64,
    pub rule_applications: BTreeMap<String, u64>,
    pub recursive_applications: u64,
    pub builtin_cost: u64,
    pub append_cost: u64,
    pub steps: u64,
}

impl RunStats {
    pub fn applications(&self) -> u64 {
        self.rule_applications.values().sum()
    }

    pub fn max_applications_per_rule(&self) -> u64 {
        self.rule_applications.values().copied().max().unwrap_or(0)
    }

    pub fn applications_of(&self, rule: &str) -> u64 {
        self.rule_applications.get(rule).copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunErrorKind {
    /// The store became inconsistent.
    Fail,
    /// No rule applies to a user call.
    Stuck(String),
    Unbound(String),
    ModeError(String),
    NonLinear(String),
    LimitExceeded,
}

#[derive(Clone, Debug)]
pub struct RunError {
    pub kind: RunErrorKind,
    pub stats: RunStats,
    pub trace: Vec<String>,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RunErrorKind::Fail => write!(f, "failure: built-in store is inconsistent"),
            RunErrorKind::Stuck(c) => write!(f, "stuck: no rule applies to {c}"),
            RunErrorKind::Unbound(m) => write!(f, "unbound: {m}"),
            RunErrorKind::ModeError(m) => write!(f, "mode error: {m}"),
            RunErrorKind::NonLinear(m) => write!(f, "non-linear arithmetic: {m}"),
            RunErrorKind::LimitExceeded => write!(f, "step limit exceeded"),
        }
    }
}

impl std::error::Error for RunError {}

/// Configuration of the interpreter between transitions.
#[derive(Clone, Debug)]
pub struct State {
    /// Goal stack; the leftmost goal is the last element.
    pub goals: Vec<Atom>,
    pub store: Store,
    pub supply: VarSupply,
    pub stats: RunStats,
    pub trace: Option<Vec<String>>,
}

impl State {
    /// Pending goals, leftmost first.
    pub fn pending(&self) -> Vec<Atom> {
        self.goals.iter().rev().cloned().collect()
    }
}

/// Result of a finished run.
#[derive(Clone, Debug)]
pub struct Answer {
    /// Query variables with their resolved values.
    pub bindings: Vec<(String, Term)>,
    /// Arithmetic constraints left on unbound query variables.
    pub residual: Vec<Builtin>,
    pub stats: RunStats,
    pub trace: Vec<String>,
}

impl Answer {
    pub fn get(&self, name: &str) -> Option<&Term> {
        self.bindings.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, t) in &self.bindings {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{n} = {t}")?;
        }
        for r in &self.residual {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{r}")?;
        }
        if first {
            f.write_str("true")?;
        }
        Ok(())
    }
}

pub struct Machine<'p> {
    program: &'p Program,
    state: State,
    limits: Limits,
}

impl<'p> Machine<'p> {
    pub fn new(program: &'p Program, goal: &[Atom], opts: &RunOptions) -> Machine<'p> {
        let mut supply = VarSupply::new();
        if let Some(v) = program.max_var() {
            supply.reserve([v]);
        }
        for a in goal {
            supply.reserve(a.vars());
        }
        let store = if opts.strict_assign {
            Store::strict()
        } else {
            Store::new()
        };
        let state = State {
            goals: goal.iter().rev().cloned().collect(),
            store,
            supply,
            stats: RunStats::default(),
            trace: opts.trace.then(Vec::new),
        };
        Machine {
            program,
            state,
            limits: opts.limits,
        }
    }

    /// Continues from an existing state with another program.
    pub fn resume(program: &'p Program, mut state: State, limits: Limits) -> Machine<'p> {
        if let Some(v) = program.max_var() {
            state.supply.reserve([v]);
        }
        Machine {
            program,
            state,
            limits,
        }
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn into_state(self) -> State {
        self.state
    }

    fn error(&self, kind: RunErrorKind) -> RunError {
        RunError {
            kind,
            stats: self.state.stats.clone(),
            trace: self.state.trace.clone().unwrap_or_default(),
        }
    }

    fn log(&mut self, line: impl FnOnce() -> String) {
        if let Some(t) = &mut self.state.trace {
            t.push(line());
        }
    }

    fn theory_error(&self, e: TheoryError) -> RunError {
        match e {
            TheoryError::NonLinear(m) => self.error(RunErrorKind::NonLinear(m)),
            TheoryError::Unbound(m) => self.error(RunErrorKind::Unbound(m)),
        }
    }

    /// Performs one transition. Returns `false` when no goal is left.
    pub fn step(&mut self) -> Result<bool, RunError> {
        let Some(atom) = self.state.goals.pop() else {
            return Ok(false);
        };
        if self.state.stats.steps >= self.limits.max_steps {
            self.state.goals.push(atom);
            return Err(self.error(RunErrorKind::LimitExceeded));
        }
        self.state.stats.steps += 1;
        match atom {
            Atom::Builtin(b) => self.tell(&b)?,
            Atom::Append { args, .. } => self.append(&args)?,
            Atom::Call(call) => self.call(&call)?,
        }
        Ok(true)
    }

    /// Executes built-ins at the front of the goal stack until a user call
    /// (or nothing) is leftmost.
    pub fn settle(&mut self) -> Result<(), RunError> {
        while matches!(self.state.goals.last(), Some(Atom::Builtin(_) | Atom::Append { .. })) {
            self.step()?;
        }
        Ok(())
    }

    pub fn run(&mut self) -> Result<(), RunError> {
        while self.step()? {}
        Ok(())
    }

    fn tell(&mut self, b: &Builtin) -> Result<(), RunError> {
        if *b != Builtin::True {
            self.state.stats.builtin_cost += 1;
        }
        self.log(|| format!("TELL {b}"));
        if let Err(e) = self.state.store.tell(b) {
            return Err(self.theory_error(e));
        }
        if self.state.store.is_inconsistent() {
            return Err(self.error(RunErrorKind::Fail));
        }
        Ok(())
    }

    fn append(&mut self, args: &[Term; 3]) -> Result<(), RunError> {
        let x = self.state.store.resolve(&args[0]);
        let (elems, tail) = x.list_parts();
        if !matches!(tail, Term::Nil) {
            return Err(self.error(RunErrorKind::ModeError(format!(
                "first argument of append is not a closed list: {x}"
            ))));
        }
        let n = elems.len() as u64;
        let y = self.state.store.resolve(&args[1]);
        let z = x.concat(&y).expect("closed list");
        self.log(|| format!("TELL a({x},{y},{})", args[2]));
        self.state.stats.builtin_cost += n;
        self.state.stats.append_cost += n;
        self.state.store.unify(&args[2], &z);
        if self.state.store.is_inconsistent() {
            return Err(self.error(RunErrorKind::Fail));
        }
        Ok(())
    }

    /// Resolves a call and evaluates ground arithmetic arguments.
    fn prepare_call(&mut self, call: &Term) -> Term {
        let t = self.state.store.resolve(call);
        let mut evals = 0;
        let out = eval_args(&t, &mut evals);
        self.state.stats.builtin_cost += evals;
        out
    }

    fn call(&mut self, call: &Term) -> Result<(), RunError> {
        let call = self.prepare_call(call);
        let Some((f, n)) = call.functor() else {
            return Err(self.error(RunErrorKind::Stuck(call.to_string())));
        };
        let program = self.program;
        let ids = program.rules_for(f, n);
        for &i in ids {
            let rule = &program.rules()[i];
            self.state.stats.builtin_cost += 1;
            let fired = try_rule(&call, rule, &self.state.store, &mut self.state.supply);
            match fired {
                Some(body) => {
                    let stats = &mut self.state.stats;
                    *stats.rule_applications.entry(rule.name.to_string()).or_default() += 1;
                    if program.is_recursive(i) {
                        stats.recursive_applications += 1;
                    }
                    self.log(|| format!("APPLY {}", rule.name));
                    self.state.goals.extend(body.into_iter().rev());
                    return Ok(());
                }
                None => {
                    self.state.stats.rule_attempts += 1;
                    self.log(|| format!("TRY {} FAIL", rule.name));
                }
            }
        }
        Err(self.error(RunErrorKind::Stuck(call.to_string())))
    }
}

fn eval_args(t: &Term, evals: &mut u64) -> Term {
    match t.as_app() {
        Some((f, args)) if !t.is_arith() && args.iter().any(|a| a.is_arith() || a.as_app().is_some()) => {
            let args = args
                .iter()
                .map(|a| {
                    if a.is_arith() && a.is_ground() {
                        *evals += 1;
                        Term::Int(eval_term(a).expect("ground arithmetic"))
                    } else if a.as_app().is_some() && !a.is_arith() {
                        eval_args(a, evals)
                    } else {
                        a.clone()
                    }
                })
                .collect();
            Term::app(f.clone(), args)
        }
        _ => t.clone(),
    }
}

/// Tries one rule on a resolved call: matches the head, checks the guard by
/// entailment and returns the instantiated body with fresh local variables.
pub fn try_rule(call: &Term, rule: &Rule, store: &Store, supply: &mut VarSupply) -> Option<Vec<Atom>> {
    let mut theta = Subst::new();
    if !match_into(&rule.head, call, &mut theta) {
        return None;
    }
    for g in &rule.guard {
        if let Builtin::TermEq(a, b) = g {
            let open = |t: &Term| t.vars().iter().any(|v| !theta.contains(*v));
            match (open(a), open(b)) {
                (false, false) => {}
                (true, false) => {
                    let other = store.resolve(&theta.apply(b));
                    if !match_into(a, &other, &mut theta) {
                        return None;
                    }
                    continue;
                }
                (false, true) => {
                    let other = store.resolve(&theta.apply(a));
                    if !match_into(b, &other, &mut theta) {
                        return None;
                    }
                    continue;
                }
                (true, true) => return None,
            }
        }
        let Ok(inst) = g.apply(&theta) else {
            return None;
        };
        if !store.entails(&inst) {
            return None;
        }
    }
    let mut locals = BTreeSet::new();
    for a in &rule.body {
        a.collect_vars(&mut locals);
    }
    for v in locals {
        if !theta.contains(v) {
            theta.insert(v, Term::Var(supply.fresh()));
        }
    }
    rule.body.iter().map(|a| a.apply(&theta).ok()).collect()
}

/// Runs a goal to completion and reports the query variables' values.
pub fn run_goal(
    program: &Program,
    goal: &[Atom],
    names: &BTreeMap<Var, String>,
    opts: &RunOptions,
) -> Result<Answer, RunError> {
    let mut m = Machine::new(program, goal, opts);
    m.run()?;
    let state = m.into_state();
    Ok(answer_of(&state, names))
}

pub fn answer_of(state: &State, names: &BTreeMap<Var, String>) -> Answer {
    let store = &state.store;
    let mut bindings = Vec::new();
    let mut open = BTreeSet::new();
    for (v, n) in names {
        let t = store.resolve(&Term::Var(*v));
        if t == Term::Var(*v) {
            open.insert(*v);
        }
        bindings.push((n.clone(), t));
    }
    let residual = if open.is_empty() {
        Vec::new()
    } else {
        store
            .project(&open)
            .into_iter()
            .filter(|b| !matches!(b, Builtin::TermEq(..)))
            .collect()
    };
    Answer {
        bindings,
        residual,
        stats: state.stats.clone(),
        trace: state.trace.clone().unwrap_or_default(),
    }
}

pub fn run(program: &Program, query: &Query, opts: &RunOptions) -> Result<Answer, RunError> {
    run_goal(program, &query.goal, &query.names, opts)
}
