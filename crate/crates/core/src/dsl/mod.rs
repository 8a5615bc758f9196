//! The rule language: AST, parser and canonical printer.

mod ast;
mod format;
mod parser;

pub use ast::{Connective, Literal, Program, Rule, Sign, Statement, Term};
pub use format::{format_program, format_statement};
pub use parser::{parse_literal, parse_program};
