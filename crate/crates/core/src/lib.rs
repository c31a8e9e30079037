//! Repeated recursion unfolding for single-headed simplification rules.
//!
//! The crate contains a small rule language with an instrumented interpreter
//! ([`engine`]), a constraint theory of linear integer arithmetic and term
//! equality ([`theory`]), the unfolding transformation and its program
//! variants ([`transform`]), the rule simplifier ([`simplify`]) and the
//! benchmark harness ([`bench`]).

pub mod bench;
pub mod engine;
pub mod program;
pub mod simplify;
pub mod syntax;
pub mod term;
pub mod theory;
pub mod transform;

pub use engine::{run, Answer, Limits, RunError, RunErrorKind, RunOptions, RunStats};
pub use program::{Atom, Program, Rule};
pub use syntax::{parse_program, parse_query, parse_rule, print_program, print_rule, PrintOptions};
pub use term::{Subst, Symbol, Term, Var, VarSupply};
pub use theory::{Builtin, LinExpr, Rel, Store};
