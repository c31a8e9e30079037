#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rru_core::engine::{Machine, State};
use rru_core::program::linear_normal;
use rru_core::{parse_program, Atom, Limits, Program, RunOptions, Rule, Term, Var};

pub const SUM: &str = "sum(N,S) <=> N>1 | S := N+S1, sum(N-1,S1).\nsum(N,S) <=> N=1 | S=1.\n";
pub const REV: &str = "r([C|A],D) <=> r(A,B), a(B,[C],D).\nr([],D) <=> D=[].\n";

pub fn sum_program() -> Program {
    parse_program(SUM).unwrap()
}

pub fn rev_program() -> Program {
    parse_program(REV).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn int_list(xs: &[i64]) -> Term {
    Term::list(xs.iter().map(|&x| Term::int(x)).collect::<Vec<_>>())
}

pub fn random_list(rng: &mut ChaCha8Rng, len: usize) -> Vec<i64> {
    (0..len).map(|_| rng.random_range(-50..50)).collect()
}

/// `f(input, _G0)`.
pub fn goal(functor: &str, input: Term) -> Vec<Atom> {
    vec![Atom::Call(Term::app(functor, vec![input, Term::Var(Var(0))]))]
}

/// Applies `rule` to the single call in `goal` and runs the built-ins that
/// follow. `None` when the rule does not apply.
pub fn one_step(rule: &Rule, goal: &[Atom]) -> Option<State> {
    let p = Program::new(vec![rule.clone()]);
    let mut m = Machine::new(&p, goal, &RunOptions::default());
    m.step().ok()?;
    m.settle().expect("built-ins after one step");
    Some(m.into_state())
}

/// Pending user calls, resolved through the store, with arithmetic
/// normalized and variables numbered by first occurrence. Pending built-ins
/// are left to [`complete`].
pub fn residual_calls(s: &State) -> Vec<String> {
    let mut seen: HashMap<Var, usize> = HashMap::new();
    s.pending()
        .iter()
        .filter_map(Atom::as_call)
        .map(|t| {
            let t = linear_normal(&s.store.resolve(t));
            let t = t.map_vars(&mut |v| {
                let k = seen.len();
                let k = *seen.entry(v).or_insert(k);
                Some(Term::atom(&format!("v{k}")))
            });
            t.to_string()
        })
        .collect()
}

/// Runs the remaining goals of `s` with `p` and returns the value of `_G0`.
pub fn complete(p: &Program, s: State) -> Result<Term, String> {
    let mut m = Machine::resume(p, s, Limits::default());
    m.run().map_err(|e| e.to_string())?;
    let st = m.into_state();
    Ok(st.store.resolve(&Term::Var(Var(0))))
}

/// `Σ cᵢ·xᵢ + k rel 0` over variables `_G0.._G{n-1}`.
#[derive(Clone, Debug)]
pub struct Lin {
    pub coeffs: Vec<i64>,
    pub k: i64,
    pub rel: rru_core::Rel,
}

impl Lin {
    pub fn holds(&self, x: &[i64]) -> bool {
        let v: i64 = self.coeffs.iter().zip(x).map(|(c, x)| c * x).sum::<i64>() + self.k;
        self.rel.holds(v.cmp(&0))
    }

    pub fn builtin(&self) -> rru_core::Builtin {
        let mut e = rru_core::LinExpr::constant(self.k);
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != 0 {
                e = e.add(&rru_core::LinExpr::term(*c, Var(i as u32)));
            }
        }
        rru_core::Builtin::LinCmp(self.rel, e, rru_core::LinExpr::zero())
    }
}

pub const GRID: i64 = 20;

/// Every point of `[-20,20]^vars` satisfying all of `sys`.
pub fn grid_solutions(sys: &[Lin], vars: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let side = (2 * GRID + 1) as usize;
    let total = side.pow(vars as u32);
    let mut x = vec![0i64; vars];
    for idx in 0..total {
        let mut r = idx;
        for xi in x.iter_mut() {
            *xi = (r % side) as i64 - GRID;
            r /= side;
        }
        if sys.iter().all(|c| c.holds(&x)) {
            out.push(x.clone());
        }
    }
    out
}

pub fn random_rel(rng: &mut ChaCha8Rng) -> rru_core::Rel {
    use rru_core::Rel::*;
    [Lt, Le, Eq, Ne, Ge, Gt][rng.random_range(0..6)]
}

pub fn random_lin(rng: &mut ChaCha8Rng, vars: usize) -> Lin {
    Lin {
        coeffs: (0..vars).map(|_| rng.random_range(-4..=4)).collect(),
        k: rng.random_range(-30..=30),
        rel: random_rel(rng),
    }
}

/// `-b ≤ xᵢ ≤ b` for every variable, `b ≤ 20`.
pub fn box_constraints(vars: usize, b: i64) -> Vec<Lin> {
    let mut out = Vec::new();
    for i in 0..vars {
        let mut c = vec![0; vars];
        c[i] = 1;
        out.push(Lin { coeffs: c.clone(), k: -b, rel: rru_core::Rel::Le });
        out.push(Lin { coeffs: c, k: b, rel: rru_core::Rel::Ge });
    }
    out
}
