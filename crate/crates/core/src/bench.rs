//! Benchmark harness: runs a workload over ranges of inputs under several
//! program configurations, aggregates the interpreter's counters per input
//! bucket and fits log-log slopes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use crate::engine::{answer_of, Limits, Machine, RunError, RunOptions, RunStats};
use crate::program::{Atom, Program};
use crate::term::{Symbol, Term, Var};
use crate::transform::{floor_log2, transform, Mode, TransformConfig, TransformError, TransformReport};

/// Query family: `c(n,R)` with an integer, or `c([1..n],R)` with a list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Workload {
    Sum,
    Reverse,
}

impl Workload {
    /// Guesses the family from the head of the recursive rule.
    pub fn detect(p: &Program, rule: &str) -> Workload {
        let list_head = p
            .rule(rule)
            .and_then(|r| r.head.as_app().map(|(_, a)| a.first().is_some_and(|t| t.as_cons().is_some())))
            .unwrap_or(false);
        if list_head {
            Workload::Reverse
        } else {
            Workload::Sum
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Workload::Sum => "sum",
            Workload::Reverse => "reverse",
        }
    }

    pub fn input(self, n: u64) -> Term {
        match self {
            Workload::Sum => Term::int(n),
            Workload::Reverse => Term::list((1..=n).map(Term::int).collect::<Vec<_>>()),
        }
    }

    /// `entry(input, R)` with `R` as variable 0.
    pub fn query(self, entry: &Symbol, n: u64) -> Vec<Atom> {
        vec![Atom::Call(Term::app(entry.clone(), vec![self.input(n), Term::Var(Var(0))]))]
    }

    /// Closed-form value of `R` for the summation and reversal programs.
    pub fn expected(self, n: u64) -> Term {
        match self {
            Workload::Sum => Term::int(num_bigint::BigInt::from(n) * (n + 1) / 2),
            Workload::Reverse => Term::list((1..=n).rev().map(Term::int).collect::<Vec<_>>()),
        }
    }

    /// Recursion depth of the query with input `n`.
    pub fn depth(self, n: u64) -> u64 {
        match self {
            Workload::Sum => n.saturating_sub(1),
            Workload::Reverse => n,
        }
    }
}

/// A program variant under test and the constraint queries call.
#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub name: String,
    pub program: Program,
    pub entry: Symbol,
    /// Overrides [`BenchSpec::stride`] for this configuration.
    pub stride: Option<u64>,
}

/// The original program plus the requested transformed variants.
pub fn configs(
    p: &Program,
    rule: Option<&str>,
    bound: u64,
    modes: &[&str],
) -> Result<Vec<BenchConfig>, TransformError> {
    let mut out = Vec::new();
    for m in modes {
        if *m == "original" {
            let r = crate::transform::select_rule(p, rule)?;
            out.push(BenchConfig {
                name: "original".into(),
                program: p.clone(),
                entry: r.symbol().clone(),
                stride: None,
            });
            continue;
        }
        let mode: Mode = m.parse().map_err(|_| TransformError::UnknownRule(m.to_string()))?;
        let report = transformed(p, rule, bound, mode)?;
        out.push(BenchConfig {
            name: mode.name().into(),
            program: report.program,
            entry: report.entry,
            stride: None,
        });
    }
    Ok(out)
}

pub fn transformed(p: &Program, rule: Option<&str>, bound: u64, mode: Mode) -> Result<TransformReport, TransformError> {
    let config = TransformConfig {
        target_rule: rule.map(str::to_string),
        bound,
        levels: None,
        mode,
    };
    transform(p, &config)
}

/// Result of one query.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub value: Result<Term, String>,
    pub stats: RunStats,
    pub wall_ms: f64,
}

pub fn run_one(c: &BenchConfig, w: Workload, n: u64, limits: Limits) -> Outcome {
    let goal = w.query(&c.entry, n);
    let opts = RunOptions {
        limits,
        ..RunOptions::default()
    };
    let start = Instant::now();
    let mut m = Machine::new(&c.program, &goal, &opts);
    let result = m.run();
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let state = m.into_state();
    match result {
        Ok(()) => {
            let names: BTreeMap<Var, String> = [(Var(0), "R".to_string())].into_iter().collect();
            let a = answer_of(&state, &names);
            Outcome {
                value: Ok(a.bindings[0].1.clone()),
                stats: state.stats,
                wall_ms,
            }
        }
        Err(RunError { kind, stats, .. }) => Outcome {
            value: Err(format!("{kind:?}")),
            stats,
            wall_ms,
        },
    }
}

/// `k` consecutive buckets of equal width covering `lo..=hi`; the last one
/// absorbs the remainder.
pub fn buckets(lo: u64, hi: u64, k: usize) -> Vec<(u64, u64)> {
    let k = k.max(1) as u64;
    let width = ((hi + 1).saturating_sub(lo) / k).max(1);
    let mut out = Vec::new();
    let mut start = lo;
    for i in 0..k {
        if start > hi {
            break;
        }
        let end = if i + 1 == k { hi } else { (start + width - 1).min(hi) };
        out.push((start, end));
        start = end + 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct BucketRow {
    pub config: String,
    pub bucket_lo: u64,
    pub bucket_hi: u64,
    pub queries: u64,
    pub builtin_cost: u64,
    pub attempts: u64,
    pub applications: u64,
    pub append_cost: u64,
    /// Queries whose answer was wrong or that did not finish.
    pub failures: u64,
    pub wall_ms: f64,
}

impl BucketRow {
    pub fn mean_cost(&self) -> f64 {
        self.builtin_cost as f64 / self.queries.max(1) as f64
    }

    pub fn mean_wall_ms(&self) -> f64 {
        self.wall_ms / self.queries.max(1) as f64
    }

    pub fn midpoint(&self) -> f64 {
        (self.bucket_lo + self.bucket_hi) as f64 / 2.0
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "config",
    "bucket_lo",
    "bucket_hi",
    "queries",
    "builtin_cost",
    "attempts",
    "applications",
    "wall_ms",
];

impl BucketRow {
    pub fn csv_record(&self) -> [String; 8] {
        [
            self.config.clone(),
            self.bucket_lo.to_string(),
            self.bucket_hi.to_string(),
            self.queries.to_string(),
            self.builtin_cost.to_string(),
            self.attempts.to_string(),
            self.applications.to_string(),
            format!("{:.3}", self.wall_ms),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub workload: Workload,
    pub lo: u64,
    pub hi: u64,
    pub buckets: usize,
    /// Every `stride`-th input of each bucket is run, starting at its low
    /// end, unless the configuration sets its own stride.
    pub stride: u64,
    pub limits: Limits,
    /// Compare answers against the workload's closed form.
    pub oracle: bool,
}

impl BenchSpec {
    pub fn inputs(&self, c: &BenchConfig, (lo, hi): (u64, u64)) -> impl Iterator<Item = u64> {
        (lo..=hi).step_by(c.stride.unwrap_or(self.stride).max(1) as usize)
    }
}

/// Counters of a single benchmarked query.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryRecord {
    pub config: String,
    pub n: u64,
    pub builtin_cost: u64,
    pub append_cost: u64,
    pub attempts: u64,
    pub applications: u64,
    pub recursive_applications: u64,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub workload: Workload,
    pub rows: Vec<BucketRow>,
    pub queries: Vec<QueryRecord>,
    /// Inputs on which the configurations that ran them disagreed.
    pub disagreements: Vec<(u64, Vec<(String, String)>)>,
}

impl BenchReport {
    pub fn rows_for(&self, config: &str) -> Vec<&BucketRow> {
        self.rows.iter().filter(|r| r.config == config).collect()
    }

    /// Least-squares slope of log(mean cost) against log(bucket midpoint).
    pub fn slope(&self, config: &str) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows_for(config)
            .iter()
            .filter(|r| r.queries > 0 && r.builtin_cost > 0)
            .map(|r| (r.midpoint(), r.mean_cost()))
            .collect();
        loglog_slope(&pts)
    }

    pub fn configs(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.config) {
                out.push(r.config.clone());
            }
        }
        out
    }

    pub fn failures(&self) -> u64 {
        self.rows.iter().map(|r| r.failures).sum()
    }

    pub fn gating_ok(&self) -> bool {
        self.failures() == 0 && self.disagreements.is_empty()
    }

    /// Markdown table of mean cost per query, one column per configuration.
    pub fn markdown(&self) -> String {
        let configs = self.configs();
        let mut s = String::new();
        let _ = write!(s, "| n |");
        for c in &configs {
            let _ = write!(s, " {c} cost/query | {c} ms/query |");
        }
        s.push('\n');
        s.push_str("|---|");
        for _ in &configs {
            s.push_str("---:|---:|");
        }
        s.push('\n');
        let first = self.rows_for(&configs[0]);
        for (i, b) in first.iter().enumerate() {
            let _ = write!(s, "| {}-{} |", b.bucket_lo, b.bucket_hi);
            for c in &configs {
                let r = self.rows_for(c)[i];
                let _ = write!(s, " {:.1} | {:.3} |", r.mean_cost(), r.mean_wall_ms());
            }
            s.push('\n');
        }
        let _ = write!(s, "| slope |");
        for c in &configs {
            match self.slope(c) {
                Some(k) => {
                    let _ = write!(s, " {k:.3} | |");
                }
                None => s.push_str(" - | |"),
            }
        }
        s.push('\n');
        s
    }
}

pub fn loglog_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs every configuration on every sampled input. Configurations run on
/// separate threads; each owns its interpreter state.
pub fn bench(configs: &[BenchConfig], spec: &BenchSpec) -> BenchReport {
    let ranges = buckets(spec.lo, spec.hi, spec.buckets);
    type PerBucket = (BucketRow, Vec<(u64, Result<Term, String>)>, Vec<QueryRecord>);
    let results: Vec<Vec<PerBucket>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| {
                let ranges = &ranges;
                scope.spawn(move || {
                    ranges
                        .iter()
                        .map(|&(lo, hi)| {
                            let mut row = BucketRow {
                                config: c.name.clone(),
                                bucket_lo: lo,
                                bucket_hi: hi,
                                queries: 0,
                                builtin_cost: 0,
                                attempts: 0,
                                applications: 0,
                                append_cost: 0,
                                failures: 0,
                                wall_ms: 0.0,
                            };
                            let mut answers = Vec::new();
                            let mut records = Vec::new();
                            for n in spec.inputs(c, (lo, hi)) {
                                let o = run_one(c, spec.workload, n, spec.limits);
                                records.push(QueryRecord {
                                    config: c.name.clone(),
                                    n,
                                    builtin_cost: o.stats.builtin_cost,
                                    append_cost: o.stats.append_cost,
                                    attempts: o.stats.rule_attempts,
                                    applications: o.stats.applications(),
                                    recursive_applications: o.stats.recursive_applications,
                                });
                                row.queries += 1;
                                row.builtin_cost += o.stats.builtin_cost;
                                row.attempts += o.stats.rule_attempts;
                                row.applications += o.stats.applications();
                                row.append_cost += o.stats.append_cost;
                                row.wall_ms += o.wall_ms;
                                let wrong = match &o.value {
                                    Ok(v) => spec.oracle && *v != spec.workload.expected(n),
                                    Err(_) => true,
                                };
                                row.failures += u64::from(wrong);
                                answers.push((n, o.value.map_err(|e| e.to_string())));
                            }
                            (row, answers, records)
                        })
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("bench thread")).collect()
    });
    let mut rows = Vec::new();
    let mut queries = Vec::new();
    let mut by_input: BTreeMap<u64, Vec<(String, String)>> = BTreeMap::new();
    for (c, per_config) in configs.iter().zip(results) {
        for (row, answers, records) in per_config {
            rows.push(row);
            queries.extend(records);
            for (n, a) in answers {
                let shown = match a {
                    Ok(t) => t.to_string(),
                    Err(e) => format!("error: {e}"),
                };
                by_input.entry(n).or_default().push((c.name.clone(), shown));
            }
        }
    }
    let disagreements = by_input
        .into_iter()
        .filter(|(_, answers)| answers.iter().any(|a| a.1 != answers[0].1))
        .collect();
    BenchReport {
        workload: spec.workload,
        rows,
        queries,
        disagreements,
    }
}

/// One entry of the verification ledger.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// Trace of the first counterexample.
    pub counterexample: Option<Vec<String>>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Checks, for every input in `lo..=hi`: equal answers across original,
/// rule-order, recursionless and unbounded programs; at most
/// `⌊log₂ d⌋ + 1` recursive applications for depth `d` under rule order and
/// recursionless; and at most `2(⌊log₂ N⌋ + 1) + applications` failed rule
/// tries per recursionless query.
pub fn verify(
    p: &Program,
    rule: Option<&str>,
    bound: u64,
    lo: u64,
    hi: u64,
    workload: Workload,
) -> Result<VerifyReport, TransformError> {
    let cs = configs(p, rule, bound, &["original", "rule-order", "recursionless", "unbounded"])?;
    let limits = Limits::default();
    let k = floor_log2(bound) as u64;
    let mut agree = Check {
        name: "answers agree across configurations".into(),
        passed: true,
        detail: String::new(),
    };
    let mut log_bound = Check {
        name: "recursive applications <= floor(log2 n)+1".into(),
        passed: true,
        detail: String::new(),
    };
    let mut attempt_bound = Check {
        name: "recursionless attempts <= 2(floor(log2 N)+1) + applications".into(),
        passed: true,
        detail: String::new(),
    };
    let mut counterexample = None;
    let mut worst = (0u64, 0u64);
    for n in lo..=hi {
        let outs: Vec<Outcome> = cs.iter().map(|c| run_one(c, workload, n, limits)).collect();
        let mut first_bad: Option<usize> = None;
        let shown: Vec<String> = outs
            .iter()
            .map(|o| match &o.value {
                Ok(t) => t.to_string(),
                Err(e) => format!("error: {e}"),
            })
            .collect();
        if agree.passed && (shown.iter().any(|s| *s != shown[0]) || outs[0].value.is_err()) {
            agree.passed = false;
            agree.detail = format!(
                "n={n}: {}",
                cs.iter().zip(&shown).map(|(c, s)| format!("{}={s}", c.name)).collect::<Vec<_>>().join(", ")
            );
            first_bad.get_or_insert(1);
        }
        let d = workload.depth(n);
        let allowed = if d == 0 { 1 } else { floor_log2(d) as u64 + 1 };
        for (i, o) in outs.iter().enumerate().skip(1).take(2) {
            let used = o.stats.recursive_applications;
            worst.0 = worst.0.max(used);
            if log_bound.passed && used > allowed {
                log_bound.passed = false;
                log_bound.detail = format!("n={n}: {} made {used} recursive applications, bound {allowed}", cs[i].name);
                first_bad.get_or_insert(i);
            }
        }
        let rl = &outs[2].stats;
        let limit = 2 * (k + 1) + rl.applications();
        worst.1 = worst.1.max(rl.rule_attempts);
        if attempt_bound.passed && rl.rule_attempts > limit {
            attempt_bound.passed = false;
            attempt_bound.detail = format!("n={n}: {} attempts, bound {limit}", rl.rule_attempts);
            first_bad.get_or_insert(2);
        }
        if let (Some(i), None) = (first_bad, &counterexample) {
            let goal = workload.query(&cs[i].entry, n);
            let mut m = Machine::new(&cs[i].program, &goal, &RunOptions::traced());
            let _ = m.run();
            counterexample = m.into_state().trace;
        }
    }
    if log_bound.passed {
        log_bound.detail = format!("max {} over n in {lo}..={hi}", worst.0);
    }
    if attempt_bound.passed {
        attempt_bound.detail = format!("max {} attempts over n in {lo}..={hi}", worst.1);
    }
    if agree.passed {
        agree.detail = format!("{} inputs", hi + 1 - lo);
    }
    Ok(VerifyReport {
        checks: vec![agree, log_bound, attempt_bound],
        counterexample,
    })
}
