//! The `.nsx` scenario language.

mod ast;
mod elaborate;
mod lexer;
mod parser;
mod printer;

use thiserror::Error;

pub use ast::{Ast, AxisSpec, Check, CheckKind, Expect, LocusAst, MetricSpec, OffReq, Scenario, Stmt, Target};
pub use elaborate::{Env, Value};
pub use parser::{parse, parse_expr};
pub use printer::print;

/// First syntax error in a document. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message} (found `{token}`)")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub token: String,
}
