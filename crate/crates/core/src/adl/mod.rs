//! ADL-H: the action description language for hybrid conditional planning.

pub mod ast;
pub mod instance;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod validate;
pub mod walk;

pub use ast::*;
pub use instance::{parse_instance, GroundLiteral, InstanceSpec};
pub use parser::parse_domain;
pub use printer::pretty_print;
pub use validate::{validate, Diagnostic, Severity};

/// Syntax or declaration error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        ParseError { line: span.line, col: span.col, message: message.into(), expected: Vec::new() }
    }
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}
