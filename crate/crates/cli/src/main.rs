//! `rru`: run queries, unfold recursive rules, benchmark and verify the
//! unfolded program variants.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rru_core::bench::{self, BenchConfig, BenchSpec, Workload, CSV_HEADER};
use rru_core::syntax::Naming;
use rru_core::transform::{select_rule, transform, Mode, TransformConfig};
use rru_core::{parse_program, parse_query, print_program, Limits, PrintOptions, Program, RunOptions, RunStats};

#[derive(Parser)]
#[command(name = "rru", version, about = "Repeated recursion unfolding for simplification rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a query and print the answer and the interpreter's counters.
    Run(RunArgs),
    /// Unfold a recursive rule and print the resulting program.
    Transform(TransformArgs),
    /// Benchmark program variants over a range of inputs.
    Bench(BenchArgs),
    /// Check answers and application bounds for every input in a range.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    /// Goal, e.g. "sum(9,R)".
    #[arg(short, long)]
    query: String,
    /// Print one line per transition before the answer.
    #[arg(long)]
    trace: bool,
    #[arg(long, default_value_t = Limits::default().max_steps)]
    max_steps: u64,
}

#[derive(Args)]
struct TransformArgs {
    file: PathBuf,
    /// Rule to unfold; the first recursive rule by default.
    #[arg(long)]
    rule: Option<String>,
    /// Number of unfolding levels.
    #[arg(long, conflicts_with = "bound", required_unless_present = "bound")]
    levels: Option<usize>,
    /// Bound on the recursion depth; floor(log2 bound) levels.
    #[arg(long)]
    bound: Option<u64>,
    #[arg(long, value_enum, default_value_t = ModeArg::RuleOrder)]
    mode: ModeArg,
    /// Write the program here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Variable names in the printed rules.
    #[arg(long, value_enum, default_value_t = NamesArg::Hints)]
    names: NamesArg,
    /// Do not print the unfolding and simplification report.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct BenchArgs {
    file: PathBuf,
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    bound: u64,
    /// Inclusive input range `lo..hi`.
    #[arg(long, value_parser = parse_range)]
    inputs: (u64, u64),
    #[arg(long, default_value_t = 7)]
    buckets: usize,
    /// Comma-separated: original, rule-order, recursionless, unbounded,
    /// hand-optimized (needs --hand).
    #[arg(long, value_delimiter = ',', default_value = "original,rule-order,recursionless")]
    configs: Vec<String>,
    /// Hand-written program for the hand-optimized configuration; its first
    /// rule's constraint is called.
    #[arg(long)]
    hand: Option<PathBuf>,
    /// Run every stride-th input of each bucket.
    #[arg(long, default_value_t = 1)]
    stride: u64,
    /// Query family; guessed from the recursive rule's head by default.
    #[arg(long, value_enum)]
    workload: Option<WorkloadArg>,
    /// Also compare answers with the closed form of the workload.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = Limits::default().max_steps)]
    max_steps: u64,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    bound: u64,
    /// Inclusive input range `lo..hi`.
    #[arg(long, value_parser = parse_range)]
    inputs: (u64, u64),
    #[arg(long, value_enum)]
    workload: Option<WorkloadArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    RuleOrder,
    Recursionless,
    Unbounded,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::RuleOrder => Mode::RuleOrder,
            ModeArg::Recursionless => Mode::Recursionless,
            ModeArg::Unbounded => Mode::Unbounded,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NamesArg {
    Hints,
    Generated,
}

#[derive(Clone, Copy, ValueEnum)]
enum WorkloadArg {
    Sum,
    Reverse,
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected lo..hi, got '{s}'"))?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    let lo: u64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: u64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if lo == 0 || lo > hi {
        return Err(format!("need 1 <= lo <= hi, got {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn load(path: &Path) -> Result<Program> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_program(&text).with_context(|| format!("parsing {}", path.display()))
}

fn workload(p: &Program, rule: Option<&str>, given: Option<WorkloadArg>) -> Result<Workload> {
    Ok(match given {
        Some(WorkloadArg::Sum) => Workload::Sum,
        Some(WorkloadArg::Reverse) => Workload::Reverse,
        None => Workload::detect(p, select_rule(p, rule)?.name.as_str()),
    })
}

fn stats_line(s: &RunStats) -> String {
    format!(
        "% builtin_cost={} attempts={} applications={} recursive_applications={} append_cost={} steps={}",
        s.builtin_cost,
        s.rule_attempts,
        s.applications(),
        s.recursive_applications,
        s.append_cost,
        s.steps
    )
}

fn cmd_run(a: RunArgs) -> Result<bool> {
    let p = load(&a.file)?;
    let q = parse_query(&a.query).context("parsing query")?;
    let opts = RunOptions {
        limits: Limits { max_steps: a.max_steps },
        trace: a.trace,
        ..RunOptions::default()
    };
    match rru_core::run(&p, &q, &opts) {
        Ok(answer) => {
            for line in &answer.trace {
                println!("{line}");
            }
            println!("{answer}");
            println!("{}", stats_line(&answer.stats));
            Ok(true)
        }
        Err(e) => {
            for line in &e.trace {
                println!("{line}");
            }
            eprintln!("error: {e}");
            eprintln!("{}", stats_line(&e.stats));
            Ok(false)
        }
    }
}

fn cmd_transform(a: TransformArgs) -> Result<bool> {
    let p = load(&a.file)?;
    let config = TransformConfig {
        target_rule: a.rule,
        bound: a.bound.unwrap_or(2),
        levels: a.levels,
        mode: a.mode.into(),
    };
    let report = transform(&p, &config)?;
    let opts = PrintOptions {
        naming: match a.names {
            NamesArg::Hints => Naming::Hints,
            NamesArg::Generated => Naming::Generated,
        },
        rule_names: true,
    };
    let text = print_program(&report.program, &opts);
    match &a.out {
        Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    if !a.quiet {
        eprint!("{}", report.ladder);
        eprintln!("% entry: {}", report.entry);
    }
    Ok(true)
}

fn cmd_bench(a: BenchArgs) -> Result<bool> {
    let p = load(&a.file)?;
    let w = workload(&p, a.rule.as_deref(), a.workload)?;
    let mut cs: Vec<BenchConfig> = Vec::new();
    for name in &a.configs {
        if name == "hand-optimized" {
            let Some(path) = &a.hand else { bail!("the hand-optimized configuration needs --hand FILE") };
            let hand = load(path)?;
            let entry = hand.rules().first().context("hand-written program is empty")?.symbol().clone();
            cs.push(BenchConfig {
                name: name.clone(),
                program: hand,
                entry,
                stride: None,
            });
        } else {
            cs.extend(bench::configs(&p, a.rule.as_deref(), a.bound, &[name.as_str()])?);
        }
    }
    let spec = BenchSpec {
        workload: w,
        lo: a.inputs.0,
        hi: a.inputs.1,
        buckets: a.buckets,
        stride: a.stride,
        limits: Limits { max_steps: a.max_steps },
        oracle: a.oracle,
    };
    let report = bench::bench(&cs, &spec);
    if let Some(path) = &a.csv {
        let mut out = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        out.write_record(CSV_HEADER)?;
        for row in &report.rows {
            out.write_record(row.csv_record())?;
        }
        out.flush()?;
    }
    print!("{}", report.markdown());
    for row in report.rows.iter().filter(|r| r.failures > 0) {
        println!(
            "FAIL {} {}..{}: {} of {} queries wrong or unfinished",
            row.config, row.bucket_lo, row.bucket_hi, row.failures, row.queries
        );
    }
    for (n, answers) in report.disagreements.iter().take(5) {
        let shown: Vec<String> = answers.iter().map(|(c, v)| format!("{c}={v}")).collect();
        println!("FAIL n={n}: {}", shown.join(", "));
    }
    Ok(report.gating_ok())
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let p = load(&a.file)?;
    let w = workload(&p, a.rule.as_deref(), a.workload)?;
    let report = bench::verify(&p, a.rule.as_deref(), a.bound, a.inputs.0, a.inputs.1, w)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(trace) = &report.counterexample {
        println!("% trace of the first counterexample");
        for line in trace {
            println!("{line}");
        }
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
