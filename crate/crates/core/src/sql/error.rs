use serde::{Deserialize, Serialize};
use std::fmt;

use super::token::{LexError, LexErrorKind, Span, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorKind {
    UnterminatedString,
    UnterminatedQuotedIdentifier,
    IllegalCharacter,
    EmptyInput,
    MissingFrom,
    MissingComma,
    EmptySelectList,
    StraySemicolon,
    UnbalancedParenthesis,
    UnexpectedToken,
    UnexpectedEnd,
    Unsupported,
    NumberOutOfRange,
}

/// A parse failure with a novice-readable explanation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
    /// Jargon-free sentence; never contains grammar notation.
    pub plain_message: String,
    pub hint: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.plain_message)?;
        if let Some(h) = &self.hint {
            write!(f, " Hint: {h}")?;
        }
        Ok(())
    }
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, span: Span, found: String, message: impl Into<String>) -> Self {
        ParseError { kind, span, expected: Vec::new(), found, plain_message: message.into(), hint: None }
    }

    pub(crate) fn expecting(mut self, expected: &[&str]) -> Self {
        self.expected = expected.iter().map(|s| s.to_string()).collect();
        self
    }

    pub(crate) fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.hint = Some(hint.into());
        self
    }
}

impl From<LexError> for ParseError {
    fn from(err: LexError) -> Self {
        match err.kind {
            LexErrorKind::UnterminatedString => ParseError::new(
                ParseErrorKind::UnterminatedString,
                err.span,
                "an opening single quote".into(),
                "A text value is opened with a single quote but never closed.",
            )
            .with_hint("add a closing single quote after the text"),
            LexErrorKind::UnterminatedQuotedIdentifier => ParseError::new(
                ParseErrorKind::UnterminatedQuotedIdentifier,
                err.span,
                "an opening double quote".into(),
                "A quoted name is opened with a double quote but never closed.",
            )
            .with_hint("add a closing double quote after the name"),
            LexErrorKind::IllegalCharacter(c) => ParseError::new(
                ParseErrorKind::IllegalCharacter,
                err.span,
                format!("the character {c:?}"),
                "The query contains a character that has no meaning here.",
            )
            .with_hint("remove the character or put it inside single quotes if it is part of a text value"),
        }
    }
}

const METASYMBOLS: &[&str] = &["<", ">", "[", "]", "{", "}", "|", "::="];

/// Describes a token in words, without echoing grammar punctuation.
pub(crate) fn describe_plain(tok: &Token) -> String {
    let clean = |s: &str| !METASYMBOLS.iter().any(|m| s.contains(m));
    match tok.kind {
        TokenKind::Keyword => format!("the word {}", tok.text.to_ascii_uppercase()),
        TokenKind::Identifier | TokenKind::QuotedIdentifier if clean(&tok.text) => {
            format!("the name “{}”", tok.text)
        }
        TokenKind::Identifier | TokenKind::QuotedIdentifier => "a quoted name".into(),
        TokenKind::Constant(super::token::ConstantKind::String) if clean(&tok.text) => {
            format!("the text value “{}”", tok.text)
        }
        TokenKind::Constant(super::token::ConstantKind::String) => "a text value".into(),
        TokenKind::Constant(_) => format!("the number {}", tok.text),
        TokenKind::SpecialCharacter => symbol_name(&tok.text).to_string(),
    }
}

fn symbol_name(sym: &str) -> &'static str {
    match sym {
        "(" => "an opening parenthesis",
        ")" => "a closing parenthesis",
        "," => "a comma",
        ";" => "a semicolon",
        "." => "a dot",
        "*" => "an asterisk",
        "+" => "a plus sign",
        "-" => "a minus sign",
        "/" => "a slash",
        "%" => "a percent sign",
        "=" => "an equals sign",
        "<" => "a less-than sign",
        ">" => "a greater-than sign",
        "<=" => "a less-than-or-equal sign",
        ">=" => "a greater-than-or-equal sign",
        "<>" | "!=" => "a not-equal sign",
        "&" => "an ampersand",
        "|" => "a vertical bar",
        "#" => "a hash sign",
        "~" => "a tilde",
        "<<" => "a left-shift sign",
        ">>" => "a right-shift sign",
        _ => "a symbol",
    }
}

/// 1-based line and column of a byte offset.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let before = &source[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.chars().count(), |nl| before[nl + 1..].chars().count()) + 1;
    (line, col)
}

/// Renders a parse error as a short plain-language paragraph that quotes
/// the offending part of the query.
pub fn explain_error(err: &ParseError, source: &str) -> String {
    let (line, col) = line_col(source, err.span.start);
    let mut out = String::new();
    out.push_str(&format!("Problem at line {line}, column {col}: {}", err.plain_message));

    let start = err.span.start.min(source.len());
    let end = err.span.end.clamp(start, source.len());
    let fragment: String = if start == end {
        let tail: String = source[..start].chars().rev().take(20).collect();
        tail.chars().rev().collect()
    } else {
        source[start..end].chars().take(30).collect()
    };
    let fragment = fragment.trim();
    if fragment.is_empty() {
        out.push_str(" The query ends here.");
    } else if start == end {
        out.push_str(&format!(" The query ends right after “{fragment}”."));
    } else {
        out.push_str(&format!(" The problem is at “{fragment}”."));
    }
    if let Some(h) = &err.hint {
        out.push_str(&format!(" Try this: {h}."));
    }
    out
}
