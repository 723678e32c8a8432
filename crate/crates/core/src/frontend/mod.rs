//! Pipeline language: syntax, typing rules, validation and a programmatic builder.

pub mod ast;
pub mod builder;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod typing;
pub mod validate;

use thiserror::Error;

pub use ast::{FnRef, Function, Node, NodeId, NodeKind, Op, Program, Span};
pub use builder::{FunctionBuilder, ProgramBuilder};
pub use parser::{parse_pipeline, parse_type};
pub use printer::print_program;
pub use typing::type_apply;
pub use validate::{validate_graph, Diagnostic};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{span}: syntax error: {msg}")]
    Syntax { span: Span, msg: String },
    #[error("{span}: unknown operator {name}")]
    UnknownOperator { span: Span, name: String },
    #[error("{span}: unbound static parameter {name}")]
    UnboundStatic { span: Span, name: String },
    #[error("{span}: {op} expects {expected} static parameter(s), found {found}")]
    StaticArity {
        span: Span,
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("{span}: unknown variable {name}")]
    UnknownVariable { span: Span, name: String },
    #[error("{span}: type error: {msg}")]
    Type { span: Span, msg: String },
    #[error("{span}: cycle detected: {msg}")]
    Cycle { span: Span, msg: String },
    #[error("{span}: {msg}")]
    Semantic { span: Span, msg: String },
}

impl FrontendError {
    pub fn span(&self) -> Span {
        match self {
            FrontendError::Syntax { span, .. }
            | FrontendError::UnknownOperator { span, .. }
            | FrontendError::UnboundStatic { span, .. }
            | FrontendError::StaticArity { span, .. }
            | FrontendError::UnknownVariable { span, .. }
            | FrontendError::Type { span, .. }
            | FrontendError::Cycle { span, .. }
            | FrontendError::Semantic { span, .. } => *span,
        }
    }
}
