//! Text pipeline for the SELECT subset: tokenizer, parser, canonical
//! renderer and AST normalization.

pub mod ast;
pub mod error;
pub mod normalize;
pub mod parser;
pub mod render;
pub mod token;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub use ast::*;
pub use error::{explain_error, line_col, ParseError, ParseErrorKind};
pub use normalize::normalize;
pub use parser::{parse_expression, parse_select, parse_select_with_map};
pub use render::{render_expr, render_select, validate_ast, CanonicalSql, RenderError};
pub use token::{tokenize, Span, Token, TokenKind};

/// Top-level clauses, in the fixed order they are rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Clause {
    #[serde(rename = "SELECT")]
    Select,
    #[serde(rename = "FROM")]
    From,
    #[serde(rename = "WHERE")]
    Where,
    #[serde(rename = "GROUP BY")]
    GroupBy,
    #[serde(rename = "HAVING")]
    Having,
    #[serde(rename = "ORDER BY")]
    OrderBy,
}

impl Clause {
    pub fn keyword(self) -> &'static str {
        match self {
            Clause::Select => "SELECT",
            Clause::From => "FROM",
            Clause::Where => "WHERE",
            Clause::GroupBy => "GROUP BY",
            Clause::Having => "HAVING",
            Clause::OrderBy => "ORDER BY",
        }
    }
}

/// Where the head block's clauses and each set operator sit in a text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceMap {
    pub clauses: BTreeMap<Clause, Span>,
    /// Span of each `UNION [ALL]` keyword group, in chain order.
    pub set_ops: Vec<Span>,
}

impl SourceMap {
    pub fn clause(&self, c: Clause) -> Span {
        self.clauses.get(&c).copied().unwrap_or_default()
    }
}

impl Default for Span {
    fn default() -> Self {
        Span::new(0, 0)
    }
}
