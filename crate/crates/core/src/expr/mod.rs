//! Small smooth expression language: parser, evaluation, and exact
//! second-order forward-mode differentiation.

pub mod jet;
pub mod parse;

pub use jet::{differentiate_at, eval_value, second_directional, Jet, SmoothMapAtPoint};
pub use parse::{parse, Expr};
