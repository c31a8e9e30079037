//! Built-in constraint theory: linear integer arithmetic plus syntactic term
//! equality.

pub mod constraint;
pub mod fm;
pub mod linexpr;
pub mod store;

pub use constraint::{Builtin, Rel};
pub use linexpr::{eval_term, LinExpr};
pub use store::{diff, normalize_cmp, Store};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TheoryError {
    #[error("non-linear arithmetic: {0}")]
    NonLinear(String),
    #[error("unbound arithmetic operand: {0}")]
    Unbound(String),
}
