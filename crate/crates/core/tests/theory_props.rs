mod common;

use common::{box_constraints, grid_solutions, Lin};
use proptest::prelude::*;
use rru_core::theory::diff;
use rru_core::{Builtin, LinExpr, Rel, Store, Var};

fn rel() -> impl Strategy<Value = Rel> {
    prop_oneof![
        Just(Rel::Lt),
        Just(Rel::Le),
        Just(Rel::Eq),
        Just(Rel::Ne),
        Just(Rel::Ge),
        Just(Rel::Gt)
    ]
}

fn lin(vars: usize) -> impl Strategy<Value = Lin> {
    (prop::collection::vec(-4i64..=4, vars), -10i64..=10, rel()).prop_map(|(coeffs, k, rel)| Lin { coeffs, k, rel })
}

/// Between one and four constraints over `vars` variables, optionally boxed
/// into `[-b,b]`.
fn system() -> impl Strategy<Value = (usize, Vec<Lin>, Option<i64>, Lin)> {
    (1usize..=3).prop_flat_map(|vars| {
        (
            Just(vars),
            prop::collection::vec(lin(vars), 1..=4),
            prop::option::of(0i64..=20),
            lin(vars),
        )
    })
}

fn store(sys: &[Lin]) -> Store {
    Store::normalize(&sys.iter().map(Lin::builtin).collect::<Vec<_>>()).unwrap()
}

fn n() -> LinExpr {
    LinExpr::var(Var(0))
}

fn k(i: i64) -> LinExpr {
    LinExpr::constant(i)
}

fn mutually_entail(a: &Store, b: &Store) -> bool {
    a.constraints().iter().all(|c| b.entails(c)) && b.constraints().iter().all(|c| a.entails(c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn solver_agrees_with_grid((vars, mut sys, boxed, query) in system()) {
        if let Some(b) = boxed {
            sys.extend(box_constraints(vars, b));
        }
        let s = store(&sys);
        let sols = grid_solutions(&sys, vars);
        if !sols.is_empty() {
            prop_assert!(s.satisfiable(), "oracle SAT, solver UNSAT");
        }
        if boxed.is_some() {
            prop_assert_eq!(s.satisfiable(), !sols.is_empty());
            if !sols.is_empty() {
                let oracle = sols.iter().all(|x| query.holds(x));
                prop_assert_eq!(s.entails(&query.builtin()), oracle);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn normalize_is_a_closure((_, sys, _, _) in system()) {
        let once = store(&sys);
        let twice = Store::normalize(&once.constraints()).unwrap();
        prop_assert_eq!(once.constraints(), twice.constraints());
    }

    #[test]
    fn diff_keeps_what_is_not_implied((vars, given, _, _) in system(), extra in prop::collection::vec(lin(3), 1..4)) {
        let extra: Vec<Lin> = extra
            .into_iter()
            .map(|mut l| {
                l.coeffs.truncate(vars);
                l
            })
            .collect();
        let base = store(&given);
        prop_assume!(base.satisfiable());
        let cs: Vec<Builtin> = extra.iter().map(Lin::builtin).collect();
        let kept = diff(&cs, &base);
        let mut all: Vec<Builtin> = given.iter().map(Lin::builtin).collect();
        all.extend(kept.iter().cloned());
        let with_kept = Store::normalize(&all).unwrap();
        for c in &cs {
            prop_assert!(with_kept.entails(c), "{c} lost");
        }
        for c in &kept {
            prop_assert!(!base.entails(c), "{c} kept though implied");
        }
    }
}

#[test]
fn tightening_is_sound() {
    let a = Store::normalize(&[Builtin::cmp(Rel::Gt, n(), k(1)), Builtin::cmp(Rel::Gt, n().sub(&k(1)), k(1))]).unwrap();
    let b = Store::normalize(&[Builtin::cmp(Rel::Gt, n(), k(2))]).unwrap();
    assert!(mutually_entail(&a, &b));
    let c = Store::normalize(&[Builtin::cmp(Rel::Gt, n().scale(&2.into()), k(5))]).unwrap();
    assert!(mutually_entail(&b, &c));
}

#[test]
fn inconsistent_store_entails_everything() {
    let s = Store::normalize(&[Builtin::cmp(Rel::Gt, n(), k(3)), Builtin::cmp(Rel::Lt, n(), k(2))]).unwrap();
    assert!(!s.satisfiable());
    assert!(s.entails(&Builtin::False));
    assert!(s.entails(&Builtin::cmp(Rel::Eq, n(), k(100))));
}
