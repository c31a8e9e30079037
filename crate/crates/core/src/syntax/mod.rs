//! Concrete syntax: `[name:] head <=> [guard |] body.`

mod parse;
mod print;

pub use parse::{parse_program, parse_query, parse_query_from, parse_rule, parse_term, ParseError, Query};
pub use print::{
    generated_name, is_plain_atom, occurrence_order, print_goal, print_program, print_rule,
    variable_names, write_atom, write_builtin, write_term, ArithLayout, Naming, PrintOptions,
};
