//! Surface syntax, AST, parser and pretty-printer.

pub mod ast;
mod lexer;
mod parser;
mod pretty;

pub use ast::*;
pub use parser::{is_keyword, parse, KEYWORDS};
pub use pretty::{escape_str, pretty, pretty_value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}
