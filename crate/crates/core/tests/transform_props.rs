mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use proptest::prelude::*;
use rru_core::bench::{configs, run_one, Workload};
use rru_core::engine::Machine;
use rru_core::transform::{floor_log2, repeated_unfold, transform, Mode, TransformConfig, UnfoldLadder};
use rru_core::{Builtin, LinExpr, Program, Rel, RunOptions, Store, Symbol, Term, Var};

fn sum_ladder() -> UnfoldLadder {
    repeated_unfold(&sum_program().rules()[0], 8).unwrap()
}

fn rev_ladder() -> UnfoldLadder {
    repeated_unfold(&rev_program().rules()[0], 6).unwrap()
}

fn sum_input(n: u64) -> Term {
    Term::int(n)
}

fn rev_input(n: u64) -> Term {
    int_list(&(1..=n as i64).collect::<Vec<_>>())
}

fn answer(p: &Program, functor: &str, input: Term) -> Result<Term, String> {
    let mut m = Machine::new(p, &goal(functor, input), &RunOptions::default());
    m.run().map_err(|e| e.to_string())?;
    Ok(m.state().store.resolve(&Term::Var(Var(0))))
}

/// Does the rule fire on the call, and again on the call it leaves behind?
fn fires_twice(r: &rru_core::Rule, functor: &str, input: Term) -> bool {
    let Some(s) = one_step(r, &goal(functor, input)) else { return false };
    if !s.pending().iter().any(|a| a.as_call().is_some()) {
        return false;
    }
    let p = Program::new(vec![r.clone()]);
    let mut m = Machine::resume(&p, s, rru_core::Limits::default());
    m.step().is_ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// `{rᵢ, r₀, base}` answers like `{r₀, base}` on queries `rᵢ` applies to.
    #[test]
    fn unfolded_rules_are_redundant(i in 1usize..=8, extra in 1u64..300, rev in any::<bool>()) {
        let (p, ladder, functor) = if rev {
            (rev_program(), rev_ladder(), "r")
        } else {
            (sum_program(), sum_ladder(), "sum")
        };
        let i = i.min(ladder.depth());
        let n = (1u64 << i) + extra;
        let input = if rev { rev_input(n) } else { sum_input(n) };
        let with = Program::new(vec![ladder.levels[i - 1].rule.clone(), p.rules()[0].clone(), p.rules()[1].clone()]);
        prop_assert_eq!(answer(&with, functor, input.clone()), answer(&p, functor, input));
    }

    /// If `rᵢ` can take two consecutive steps, `rᵢ₊₁` applies.
    #[test]
    fn two_steps_of_a_level_enable_the_next(i in 0usize..6, n in 1u64..300, rev in any::<bool>()) {
        let (ladder, functor) = if rev { (rev_ladder(), "r") } else { (sum_ladder(), "sum") };
        let input = if rev { rev_input(n) } else { sum_input(n) };
        let rule = |k: usize| if k == 0 { ladder.base.clone() } else { ladder.levels[k - 1].rule.clone() };
        if fires_twice(&rule(i), functor, input.clone()) {
            prop_assert!(one_step(&rule(i + 1), &goal(functor, input)).is_some());
        }
    }

    #[test]
    fn rule_order_meets_the_logarithmic_bound(n in 1u64..=1024) {
        let cs = configs(&rev_program(), None, 1024, &["rule-order"]).unwrap();
        let o = run_one(&cs[0], Workload::Reverse, n, rru_core::Limits::default());
        prop_assert!(o.stats.recursive_applications <= floor_log2(n) as u64 + 1);
    }
}

#[test]
fn recursionless_call_graph_is_acyclic() {
    for p in [sum_program(), rev_program()] {
        let t = transform(&p, &TransformConfig::with_levels(6, Mode::Recursionless)).unwrap().program;
        let mut edges: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
        for r in t.rules() {
            let e = edges.entry(r.symbol().clone()).or_default();
            for c in r.calls() {
                e.insert(c.functor().unwrap().0.clone());
            }
        }
        // Repeatedly remove symbols without outgoing edges.
        loop {
            let sinks: Vec<Symbol> = edges.iter().filter(|(_, out)| out.iter().all(|s| !edges.contains_key(s))).map(|(s, _)| s.clone()).collect();
            if sinks.is_empty() {
                break;
            }
            for s in sinks {
                edges.remove(&s);
            }
        }
        assert!(edges.is_empty(), "cycle among {:?}", edges.keys().collect::<Vec<_>>());
    }
}

#[test]
fn level_guards_are_depth_thresholds() {
    let ladder = repeated_unfold(&sum_program().rules()[0], 25).unwrap();
    for (i, level) in (1u32..).zip(&ladder.levels) {
        let (_, args) = level.rule.head.as_app().unwrap();
        let n = args[0].as_var().unwrap();
        let threshold = Builtin::cmp(Rel::Gt, LinExpr::var(n), LinExpr::constant(1i64 << i));
        let guard = Store::normalize(&level.rule.guard).unwrap();
        let depth = Store::normalize(std::slice::from_ref(&threshold)).unwrap();
        assert!(guard.satisfiable());
        assert!(guard.entails(&threshold), "level {i}");
        assert!(level.rule.guard.iter().all(|g| depth.entails(g)), "level {i}");
    }
    for level in &rev_ladder().levels {
        assert!(Store::normalize(&level.rule.guard).unwrap().satisfiable());
    }
}
