mod common;

use common::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rru_core::engine::Machine;
use rru_core::simplify::{default_laws, simplify_rule, simplify_with};
use rru_core::transform::{repeated_unfold, same_rule, Level};
use rru_core::{Atom, Builtin, Program, RunOptions, Rule, Store, Term};

fn levels() -> Vec<(Level, &'static str)> {
    let mut out: Vec<(Level, &'static str)> = Vec::new();
    out.extend(repeated_unfold(&sum_program().rules()[0], 10).unwrap().levels.into_iter().map(|l| (l, "sum")));
    out.extend(repeated_unfold(&rev_program().rules()[0], 6).unwrap().levels.into_iter().map(|l| (l, "r")));
    out
}

fn corpus() -> Vec<Rule> {
    let mut out: Vec<Rule> = sum_program().rules().to_vec();
    out.extend(rev_program().rules().iter().cloned());
    for (l, _) in levels() {
        out.push(l.raw);
        out.push(l.rule);
    }
    out
}

/// A query the level applies to (`applicable`) or one it rejects.
fn query(functor: &str, index: usize, applicable: bool, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<Atom> {
    let k = 1usize << index;
    let n = if applicable { k + rng.random_range(1..=60) } else { rng.random_range(1..=k) };
    match functor {
        "sum" => goal("sum", Term::int(n as i64)),
        _ => goal("r", int_list(&random_list(rng, n - 1))),
    }
}

fn same_one_step(a: &Rule, b: &Rule, reference: &Program, q: &[Atom]) -> bool {
    match (one_step(a, q), one_step(b, q)) {
        (None, None) => true,
        (Some(x), Some(y)) => {
            residual_calls(&x) == residual_calls(&y) && {
                let (x, y) = (complete(reference, x), complete(reference, y));
                x.is_ok() && x == y
            }
        }
        _ => false,
    }
}

#[test]
fn simplification_is_idempotent() {
    for r in corpus() {
        let (once, _) = simplify_rule(&r);
        let (twice, report) = simplify_rule(&once);
        assert_eq!(twice, once, "{once}");
        assert!(report.laws_applied.is_empty());
    }
}

#[test]
fn law_order_does_not_change_the_result() {
    let mut rng = rng(3);
    for (level, _) in levels() {
        let (want, _) = simplify_rule(&level.raw);
        for _ in 0..12 {
            let mut laws = default_laws();
            laws.shuffle(&mut rng);
            let (got, _) = simplify_with(&level.raw, &laws);
            let order: Vec<&str> = laws.iter().map(|l| l.name()).collect();
            assert!(same_rule(&got, &want), "{order:?}: {got} vs {want}");
        }
    }
}

#[test]
fn replaying_the_report_reproduces_the_rule() {
    let laws = default_laws();
    for (level, _) in levels() {
        let (out, report) = simplify_rule(&level.raw);
        let mut cur = level.raw.clone();
        for step in &report.laws_applied {
            assert_eq!(step.before, cur);
            let law = laws.iter().find(|l| l.name() == step.law).unwrap();
            cur = law.rewrite(&cur).unwrap();
            assert_eq!(cur, step.after);
        }
        assert!(same_rule(&cur, &out));
    }
}

/// Every single rewrite recorded on the ladders preserves one-step behaviour.
#[test]
fn each_rewrite_preserves_behaviour() {
    let mut rng = rng(5);
    for (level, functor) in levels() {
        let reference = if functor == "sum" { sum_program() } else { rev_program() };
        let (_, report) = simplify_rule(&level.raw);
        assert!(!report.laws_applied.is_empty());
        for step in &report.laws_applied {
            for q in 0..30 {
                let goal = query(functor, level.index, q % 5 != 0, &mut rng);
                assert!(
                    same_one_step(&step.before, &step.after, &reference, &goal),
                    "{} changed behaviour on {}:\n{}\n{}",
                    step.law,
                    goal[0],
                    step.before,
                    step.after
                );
            }
        }
    }
}

fn arithmetic(r: &Rule) -> Vec<Builtin> {
    r.guard.iter().cloned().chain(r.body_builtins().cloned()).collect()
}

/// With the head variables fixed, guard and body built-ins of the raw and
/// simplified sum rules are satisfiable together or not at all.
#[test]
fn guards_stay_equivalent_on_head_variables() {
    let mut rng = rng(9);
    for (level, functor) in levels() {
        if functor != "sum" {
            continue;
        }
        let check = |r: &Rule, n: i64, s: i64| {
            let (_, args) = r.head.as_app().unwrap();
            let mut cs = arithmetic(r);
            cs.push(Builtin::eq(args[0].clone(), Term::int(n)));
            cs.push(Builtin::eq(args[1].clone(), Term::int(s)));
            Store::normalize(&cs).unwrap().satisfiable()
        };
        for _ in 0..50 {
            let n = rng.random_range(-10..(1 << level.index) * 2 + 10);
            let s = rng.random_range(-1000..1000);
            assert_eq!(check(&level.raw, n, s), check(&level.rule, n, s), "level {} n={n}", level.index);
        }
    }
}

fn steps_cost(r: &Rule, n: i64, steps: usize) -> u64 {
    let p = Program::new(vec![r.clone()]);
    let mut m = Machine::new(&p, &goal("sum", Term::int(n)), &RunOptions::default());
    for _ in 0..steps {
        m.step().unwrap();
        m.settle().unwrap();
    }
    m.state().stats.builtin_cost
}

#[test]
fn one_unfolded_step_costs_no_more_than_two_steps() {
    let ladder = repeated_unfold(&sum_program().rules()[0], 12).unwrap();
    let mut prev = ladder.base.clone();
    for level in &ladder.levels {
        let n = (1i64 << (level.index + 2)) + 3;
        assert!(steps_cost(&level.rule, n, 1) <= steps_cost(&prev, n, 2), "level {}", level.index);
        prev = level.rule.clone();
    }
}
