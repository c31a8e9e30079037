mod common;

use std::collections::HashMap;

use common::*;
use proptest::prelude::*;
use rru_core::bench::{configs, run_one, Workload};
use rru_core::syntax::Naming;
use rru_core::transform::{transform, Mode, TransformConfig};
use rru_core::{parse_program, parse_query, print_program, run, Limits, PrintOptions, Program, RunOptions};

/// For every `APPLY r`, the `TRY` lines directly before it name exactly the
/// textually earlier rules for the same constraint.
fn refined_order_holds(p: &Program, trace: &[String]) -> Result<(), String> {
    let mut position: HashMap<&str, (String, usize)> = HashMap::new();
    let mut earlier: HashMap<String, Vec<&str>> = HashMap::new();
    for r in p.rules() {
        let key = format!("{:?}", r.key());
        let list = earlier.entry(key.clone()).or_default();
        position.insert(r.name.as_str(), (key, list.len()));
        list.push(r.name.as_str());
    }
    let mut tried: Vec<&str> = Vec::new();
    for line in trace {
        if let Some(rest) = line.strip_prefix("TRY ") {
            tried.push(rest.trim_end_matches(" FAIL"));
        } else if let Some(name) = line.strip_prefix("APPLY ") {
            let (key, idx) = &position[name];
            let want = &earlier[key][..*idx];
            if tried != want {
                return Err(format!("{name} fired after {tried:?}, expected {want:?}"));
            }
            tried.clear();
        } else {
            tried.clear();
        }
    }
    Ok(())
}

fn programs() -> Vec<(Program, Workload)> {
    let mut out = Vec::new();
    for (p, w) in [(sum_program(), Workload::Sum), (rev_program(), Workload::Reverse)] {
        for mode in [Mode::RuleOrder, Mode::Recursionless, Mode::Unbounded] {
            out.push((transform(&p, &TransformConfig::with_levels(4, mode)).unwrap().program, w));
        }
        out.push((p, w));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn runs_are_deterministic(n in 1u64..31, which in 0usize..8) {
        let (p, w) = &programs()[which];
        let cs = configs(p, None, 16, &["original"]).unwrap();
        let a = run_one(&cs[0], *w, n, Limits::default());
        let b = run_one(&cs[0], *w, n, Limits::default());
        prop_assert_eq!(a.value, b.value);
        prop_assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn rules_fire_in_textual_order(n in 1u64..31, which in 0usize..8) {
        let (p, w) = &programs()[which];
        let entry = p.rules()[0].symbol().clone();
        let q = w.query(&entry, n);
        let mut m = rru_core::engine::Machine::new(p, &q, &RunOptions::traced());
        m.run().unwrap();
        let trace = m.into_state().trace.unwrap();
        if let Err(e) = refined_order_holds(p, &trace) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn printed_programs_parse_back(levels in 0usize..6, mode in 0usize..3, rev in any::<bool>(), generated in any::<bool>()) {
        let p = if rev { rev_program() } else { sum_program() };
        let mode = [Mode::RuleOrder, Mode::Recursionless, Mode::Unbounded][mode];
        let t = transform(&p, &TransformConfig::with_levels(levels, mode)).unwrap().program;
        let opts = PrintOptions {
            naming: if generated { Naming::Generated } else { Naming::Hints },
            rule_names: true,
        };
        let text = print_program(&t, &opts);
        let back = parse_program(&text).unwrap();
        prop_assert_eq!(back.len(), t.len());
        for (a, b) in back.rules().iter().zip(t.rules()) {
            prop_assert_eq!(a.canonical(), b.canonical());
            prop_assert_eq!(&a.name, &b.name);
        }
    }
}

#[test]
fn original_sum_counts_every_recursive_step() {
    let p = sum_program();
    for n in 2..=512u64 {
        let q = parse_query(&format!("sum({n},R)")).unwrap();
        let a = run(&p, &q, &RunOptions::default()).unwrap();
        assert_eq!(a.stats.recursive_applications, n - 1, "n={n}");
        assert_eq!(a.get("R").unwrap().to_string(), (n * (n + 1) / 2).to_string());
    }
}

#[test]
fn counters_only_grow() {
    let p = rev_program();
    let q = parse_query("r([1,2,3,4,5,6],L)").unwrap();
    let mut m = rru_core::engine::Machine::new(&p, &q.goal, &RunOptions::default());
    let mut last = m.state().stats.clone();
    while m.step().unwrap() {
        let now = m.state().stats.clone();
        assert!(now.builtin_cost >= last.builtin_cost);
        assert!(now.steps > last.steps);
        assert!(now.rule_attempts >= last.rule_attempts);
        assert!(now.applications() >= last.applications());
        last = now;
    }
}
