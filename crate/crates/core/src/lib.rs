//! A goal-directed answer set programming engine with constraints over
//! rationals and constructive negation.

pub mod ast;
pub mod cli;
pub mod compile;
pub mod diseq;
pub mod env;
pub mod interp;
pub mod linear;
pub mod output;
pub mod oracle;
pub mod parser;
pub mod store;
pub mod term;
