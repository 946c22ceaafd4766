//! Lexical analysis for the supported SQL subset.
//!
//! Tokens fall into five kinds: keywords, identifiers, quoted identifiers,
//! constants and special characters. Word operators (`AND`, `OR`, `NOT`) are
//! keywords; symbol operators are special characters.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Half-open byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// Smallest span covering both.
    pub fn cover(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    Integer,
    Decimal,
    String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Keyword,
    Identifier,
    QuotedIdentifier,
    Constant(ConstantKind),
    SpecialCharacter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    /// Lexeme. Keywords keep their source casing; quoted identifiers and
    /// string constants have their quotes stripped and escapes resolved.
    pub text: String,
    pub span: Span,
}

impl Token {
    /// Upper-cased keyword text, or `None` for other kinds.
    pub fn keyword(&self) -> Option<String> {
        (self.kind == TokenKind::Keyword).then(|| self.text.to_ascii_uppercase())
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text.eq_ignore_ascii_case(kw)
    }

    pub fn is_symbol(&self, sym: &str) -> bool {
        self.kind == TokenKind::SpecialCharacter && self.text == sym
    }

    /// Short human description used in error messages.
    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::Keyword => format!("the word {}", self.text.to_ascii_uppercase()),
            TokenKind::Identifier | TokenKind::QuotedIdentifier => format!("the name “{}”", self.text),
            TokenKind::Constant(ConstantKind::String) => format!("the text value “{}”", self.text),
            TokenKind::Constant(_) => format!("the number {}", self.text),
            TokenKind::SpecialCharacter => format!("the symbol “{}”", self.text),
        }
    }
}

/// Words the tokenizer classifies as keywords. Some are recognised only so
/// the parser can explain that the construct is not supported.
pub const KEYWORDS: &[&str] = &[
    "ALL", "AND", "AS", "ASC", "BETWEEN", "BY", "CASE", "CREATE", "CROSS", "DELETE", "DESC",
    "DISTINCT", "ELSE", "END", "EXISTS", "FALSE", "FROM", "FULL", "GROUP", "HAVING", "IN",
    "INNER", "INSERT", "IS", "JOIN", "LEFT", "LIKE", "LIMIT", "NOT", "NULL", "OFFSET", "ON",
    "OR", "ORDER", "OUTER", "RIGHT", "SELECT", "THEN", "TRUE", "UNION", "UPDATE", "WHEN",
    "WHERE", "WITH",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(word))
}

/// True when `name` can be written without double quotes.
pub fn is_plain_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !is_keyword(name)
}

/// Writes an identifier, double-quoting it only when required.
pub fn quote_identifier(name: &str) -> String {
    if is_plain_identifier(name) {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('"', "\"\""))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexErrorKind {
    UnterminatedString,
    UnterminatedQuotedIdentifier,
    IllegalCharacter(char),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct LexError {
    pub kind: LexErrorKind,
    pub span: Span,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LexErrorKind::UnterminatedString => {
                write!(f, "text value starting at offset {} is never closed", self.span.start)
            }
            LexErrorKind::UnterminatedQuotedIdentifier => {
                write!(f, "quoted name starting at offset {} is never closed", self.span.start)
            }
            LexErrorKind::IllegalCharacter(c) => {
                write!(f, "character {:?} at offset {} cannot appear in a query", c, self.span.start)
            }
        }
    }
}

const MULTI_CHAR_SYMBOLS: &[&str] = &["<=", ">=", "<>", "!=", "<<", ">>"];
const SINGLE_CHAR_SYMBOLS: &str = "(),;.*+-/%=<>&|#~";

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;

    while pos < text.len() {
        let c = text[pos..].chars().next().expect("in bounds");
        if c.is_whitespace() {
            pos += c.len_utf8();
            continue;
        }
        let start = pos;

        if c == '\'' {
            let (value, end) = scan_quoted(text, pos, b'\'').ok_or(LexError {
                kind: LexErrorKind::UnterminatedString,
                span: Span::new(start, text.len()),
            })?;
            tokens.push(Token {
                kind: TokenKind::Constant(ConstantKind::String),
                text: value,
                span: Span::new(start, end),
            });
            pos = end;
        } else if c == '"' {
            let (value, end) = scan_quoted(text, pos, b'"').ok_or(LexError {
                kind: LexErrorKind::UnterminatedQuotedIdentifier,
                span: Span::new(start, text.len()),
            })?;
            tokens.push(Token { kind: TokenKind::QuotedIdentifier, text: value, span: Span::new(start, end) });
            pos = end;
        } else if c.is_ascii_digit()
            || (c == '.' && bytes.get(pos + 1).is_some_and(|b| b.is_ascii_digit()))
        {
            let mut end = pos;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            let mut kind = ConstantKind::Integer;
            if end < bytes.len() && bytes[end] == b'.' {
                kind = ConstantKind::Decimal;
                end += 1;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
            }
            tokens.push(Token {
                kind: TokenKind::Constant(kind),
                text: text[start..end].to_string(),
                span: Span::new(start, end),
            });
            pos = end;
        } else if c.is_alphabetic() || c == '_' {
            let mut end = pos;
            for ch in text[pos..].chars() {
                if ch.is_alphanumeric() || ch == '_' || ch == '$' {
                    end += ch.len_utf8();
                } else {
                    break;
                }
            }
            let word = &text[start..end];
            let kind = if is_keyword(word) { TokenKind::Keyword } else { TokenKind::Identifier };
            tokens.push(Token { kind, text: word.to_string(), span: Span::new(start, end) });
            pos = end;
        } else if let Some(sym) = MULTI_CHAR_SYMBOLS.iter().find(|s| text[pos..].starts_with(**s)) {
            tokens.push(Token {
                kind: TokenKind::SpecialCharacter,
                text: sym.to_string(),
                span: Span::new(start, start + sym.len()),
            });
            pos += sym.len();
        } else if SINGLE_CHAR_SYMBOLS.contains(c) {
            tokens.push(Token {
                kind: TokenKind::SpecialCharacter,
                text: c.to_string(),
                span: Span::new(start, start + 1),
            });
            pos += 1;
        } else {
            return Err(LexError {
                kind: LexErrorKind::IllegalCharacter(c),
                span: Span::new(start, start + c.len_utf8()),
            });
        }
    }
    Ok(tokens)
}

/// Scans a quoted run starting at `start` (which holds the quote byte).
/// A doubled quote is an escaped quote. Returns the unescaped content and the
/// offset just past the closing quote.
fn scan_quoted(text: &str, start: usize, quote: u8) -> Option<(String, usize)> {
    let bytes = text.as_bytes();
    let mut value = String::new();
    let mut pos = start + 1;
    let mut run_start = pos;
    while pos < bytes.len() {
        if bytes[pos] == quote {
            value.push_str(&text[run_start..pos]);
            if bytes.get(pos + 1) == Some(&quote) {
                value.push(quote as char);
                pos += 2;
                run_start = pos;
                continue;
            }
            return Some((value, pos + 1));
        }
        pos += 1;
    }
    None
}
