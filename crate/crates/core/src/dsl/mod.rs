//! The probabilistic-loop language: lexer, parser, validation and desugaring.

mod ast;
mod desugar;
mod lexer;
mod parser;
mod validate;

pub use ast::{Distribution, Expr, Init, InitValue, Program, Statement, SupportHint};
pub use desugar::{desugar, CoreInit, CoreProgram, FreshDraw, Update};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse_program;
pub use validate::{validate, Issue, Severity, ValidationReport};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at {line}:{column}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        line: usize,
        column: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("undefined variable `{name}` at {line}:{column}")]
    UndefinedVariable {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("duplicate init of `{name}` at {line}:{column}")]
    DuplicateInit {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("invalid program: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("cannot desugar: {0}")]
    DesugarUnsupported(String),
}

/// Parses, validates and desugars in one step.
pub fn compile(source: &str) -> Result<(Program, CoreProgram), DslError> {
    let program = parse_program(source)?;
    let report = validate(&program);
    if report.has_errors() {
        return Err(DslError::Invalid(
            report.errors().map(|i| i.message.clone()).collect(),
        ));
    }
    let core = desugar(&program)?;
    Ok((program, core))
}
