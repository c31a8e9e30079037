//! Browser bindings. Each export takes program text and returns a JSON
//! string; errors come back as `{"error": "..."}` so the page has a single
//! code path.

use rru_core::bench::{configs, Workload};
use rru_core::engine::Machine;
use rru_core::transform::{select_rule, transform as unfold, Mode, TransformConfig};
use rru_core::{parse_program, parse_query, print_program, Limits, PrintOptions, Program, RunOptions, RunStats, Term, Var};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

/// Most points a cost curve will contain; wider ranges are sampled.
pub const MAX_POINTS: u64 = 256;

/// Step budget per query, low enough to keep the page responsive.
pub const STEP_LIMIT: u64 = 200_000;

fn stats_json(s: &RunStats) -> Value {
    json!({
        "builtin_cost": s.builtin_cost,
        "attempts": s.rule_attempts,
        "applications": s.applications(),
        "recursive_applications": s.recursive_applications,
        "append_cost": s.append_cost,
        "steps": s.steps,
    })
}

fn program(source: &str) -> Result<Program, String> {
    parse_program(source).map_err(|e| e.to_string())
}

fn mode(name: &str) -> Result<Mode, String> {
    name.parse()
}

pub fn transform_json(source: &str, levels: usize, mode_name: &str) -> Result<Value, String> {
    let p = program(source)?;
    let report = unfold(&p, &TransformConfig::with_levels(levels, mode(mode_name)?)).map_err(|e| e.to_string())?;
    Ok(json!({
        "program": print_program(&report.program, &PrintOptions::default()),
        "report": report.ladder.to_string(),
        "entry": report.entry.to_string(),
    }))
}

pub fn run_json(source: &str, query: &str, trace: bool) -> Result<Value, String> {
    let p = program(source)?;
    let q = parse_query(query).map_err(|e| e.to_string())?;
    let opts = RunOptions {
        limits: Limits { max_steps: STEP_LIMIT },
        trace,
        ..RunOptions::default()
    };
    Ok(match rru_core::run(&p, &q, &opts) {
        Ok(a) => json!({
            "answer": a.to_string(),
            "stats": stats_json(&a.stats),
            "trace": a.trace,
        }),
        Err(e) => json!({
            "error": e.to_string(),
            "stats": stats_json(&e.stats),
            "trace": e.trace,
        }),
    })
}

fn cost(p: &Program, goal: &[rru_core::Atom]) -> (Option<u64>, Option<Term>) {
    let opts = RunOptions {
        limits: Limits { max_steps: STEP_LIMIT },
        ..RunOptions::default()
    };
    let mut m = Machine::new(p, goal, &opts);
    match m.run() {
        Ok(()) => {
            let s = m.into_state();
            (Some(s.stats.builtin_cost), Some(s.store.resolve(&Term::Var(Var(0)))))
        }
        Err(_) => (None, None),
    }
}

/// Cost per query of the original program and of the variant unfolded
/// `levels` times, for inputs `lo..=hi` of the workload the recursive rule
/// suggests (integers or lists `[1..n]`).
pub fn cost_curve_json(source: &str, levels: usize, mode_name: &str, lo: u64, hi: u64) -> Result<Value, String> {
    if lo == 0 || lo > hi {
        return Err(format!("need 1 <= lo <= hi, got {lo}..{hi}"));
    }
    let p = program(source)?;
    let w = Workload::detect(&p, select_rule(&p, None).map_err(|e| e.to_string())?.name.as_str());
    let m = mode(mode_name)?;
    let bound = 1u64 << levels.min(62);
    let cs = configs(&p, None, bound, &["original", m.name()]).map_err(|e| e.to_string())?;
    let step = (hi - lo) / MAX_POINTS + 1;
    let mut points = Vec::new();
    for n in (lo..=hi).step_by(step as usize) {
        let (a, va) = cost(&cs[0].program, &w.query(&cs[0].entry, n));
        let (b, vb) = cost(&cs[1].program, &w.query(&cs[1].entry, n));
        points.push(json!({
            "n": n,
            "original": a,
            "transformed": b,
            "agree": va.is_some() && va == vb,
        }));
    }
    Ok(json!({ "workload": w.name(), "mode": m.name(), "points": points }))
}

fn respond(r: Result<Value, String>) -> String {
    r.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

#[wasm_bindgen]
pub fn transform(source: &str, levels: usize, mode: &str) -> String {
    respond(transform_json(source, levels, mode))
}

#[wasm_bindgen]
pub fn run(source: &str, query: &str, trace: bool) -> String {
    respond(run_json(source, query, trace))
}

#[wasm_bindgen]
pub fn cost_curve(source: &str, levels: usize, mode: &str, lo: u64, hi: u64) -> String {
    respond(cost_curve_json(source, levels, mode, lo, hi))
}
