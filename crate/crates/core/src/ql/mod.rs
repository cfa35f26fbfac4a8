//! The query language: lexer, AST, parser, validator and pretty-printer.

pub mod ast;
mod diagnostic;
pub mod lexer;
mod parser;
mod pretty;
mod validate;

pub use ast::*;
pub use diagnostic::{Diagnostic, Position, Severity};
pub use lexer::tokenize;
pub use parser::{parse, parse_diagnostic, parse_with, Dialect, ParseOptions};
pub use pretty::pretty_print;
pub use validate::validate;
