//! Context-aware completion for the query editor, and the pseudo-code
//! front end that turns short English-like requests into SQL.

mod pseudo;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{SchemaCatalog, TableDef};
use crate::sql::token::{quote_identifier, KEYWORDS};
use crate::sql::{Span, AGGREGATES};

pub use pseudo::{generate_from_pseudocode, parse_pseudocode, Generated, Projections, PseudoAction, PseudoError, PseudoFilter, PseudoQuery, PseudoSort, CHEAT_SHEET, GRAMMAR_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    Keyword,
    Table,
    Column,
    Function,
    Snippet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionCandidate {
    pub text: String,
    pub kind: CandidateKind,
    /// Lower ranks are listed first.
    pub rank: u32,
    pub explanation: String,
    /// The part of the input the candidate replaces: the word under the cursor.
    pub replace: Span,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Word(&'a str),
    Quoted(String),
    Sym(&'a str),
    Value,
}

impl Tok<'_> {
    fn is_kw(&self, kw: &str) -> bool {
        matches!(self, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn name(&self) -> Option<String> {
        match self {
            Tok::Word(w) if !crate::sql::token::is_keyword(w) => Some(w.to_string()),
            Tok::Quoted(q) => Some(q.clone()),
            _ => None,
        }
    }

    fn is_comparison(&self) -> bool {
        matches!(self, Tok::Sym(s) if ["=", "<>", "!=", "<", "<=", ">", ">="].contains(s))
    }
}

/// Forgiving scanner for partial lines: unterminated quotes run to the end.
fn scan(line: &str) -> Vec<Tok<'_>> {
    let b = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == b'_' || c >= 0x80 {
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] >= 0x80) {
                i += 1;
            }
            out.push(Tok::Word(&line[s..i]));
        } else if c.is_ascii_digit() {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'.') {
                i += 1;
            }
            out.push(Tok::Value);
        } else if c == b'\'' || c == b'"' {
            let s = i + 1;
            i += 1;
            while i < b.len() && b[i] != c {
                i += 1;
            }
            let inner = line[s..i.min(b.len())].to_string();
            i = (i + 1).min(b.len());
            out.push(if c == b'"' { Tok::Quoted(inner) } else { Tok::Value });
        } else {
            let two = line.get(i..i + 2).filter(|t| ["<=", ">=", "<>", "!="].contains(t));
            let len = two.map_or(1, |_| 2);
            out.push(Tok::Sym(&line[i..i + len]));
            i += len;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Clause {
    Select,
    From,
    Join,
    Predicate,
    GroupBy,
    OrderBy,
}

fn clause_of(toks: &[Tok], i: usize) -> Option<Clause> {
    let t = &toks[i];
    let after = |kw| i > 0 && toks[i - 1].is_kw(kw);
    Some(if t.is_kw("SELECT") {
        Clause::Select
    } else if t.is_kw("FROM") {
        Clause::From
    } else if t.is_kw("JOIN") {
        Clause::Join
    } else if ["WHERE", "AND", "OR", "ON", "HAVING"].iter().any(|k| t.is_kw(k)) {
        Clause::Predicate
    } else if t.is_kw("BY") && after("GROUP") {
        Clause::GroupBy
    } else if t.is_kw("BY") && after("ORDER") {
        Clause::OrderBy
    } else {
        return None;
    })
}

/// Tables named after FROM or JOIN anywhere in the line, with their aliases.
fn scope(toks: &[Tok]) -> Vec<(String, Option<String>)> {
    let mut out = Vec::new();
    let mut in_from = false;
    let mut i = 0;
    while i < toks.len() {
        match clause_of(toks, i) {
            Some(Clause::From | Clause::Join) => in_from = true,
            Some(_) => in_from = false,
            None => {}
        }
        let starts = i > 0 && (toks[i - 1].is_kw("FROM") || toks[i - 1].is_kw("JOIN") || (in_from && toks[i - 1] == Tok::Sym(",")));
        if starts {
            if let Some(mut table) = toks[i].name() {
                if toks.get(i + 1) == Some(&Tok::Sym(".")) {
                    if let Some(n) = toks.get(i + 2).and_then(Tok::name) {
                        table = format!("{table}.{n}");
                        i += 2;
                    }
                }
                let alias = match toks.get(i + 1) {
                    Some(t) if t.is_kw("AS") => toks.get(i + 2).and_then(Tok::name),
                    Some(t) => t.name(),
                    None => None,
                };
                out.push((table, alias));
            }
        }
        i += 1;
    }
    out
}

fn keyword_help(kw: &str) -> &'static str {
    match kw {
        "SELECT" => "starts a query and lists the columns to return",
        "FROM" => "names the table to read rows from",
        "WHERE" => "keeps only the rows that match a condition",
        "JOIN" => "combines rows of two tables on a condition",
        "ON" => "gives the condition a join matches rows on",
        "GROUP BY" => "collects rows with equal values into groups",
        "HAVING" => "keeps only the groups that match a condition",
        "ORDER BY" => "sorts the result",
        "AS" => "gives a column or table another name",
        "AND" => "requires both conditions to hold",
        "OR" => "requires at least one condition to hold",
        "ASC" => "sorts from smallest to largest",
        "DESC" => "sorts from largest to smallest",
        "DISTINCT" => "removes duplicate rows from the result",
        "UNION" => "appends the rows of another query, removing duplicates",
        _ => "SQL keyword",
    }
}

struct Builder<'a> {
    prefix: String,
    replace: Span,
    out: Vec<CompletionCandidate>,
    catalog: &'a SchemaCatalog,
}

impl Builder<'_> {
    fn push(&mut self, match_on: &str, text: String, kind: CandidateKind, rank: u32, explanation: String) {
        if !match_on.to_lowercase().starts_with(&self.prefix.to_lowercase()) {
            return;
        }
        if self.out.iter().any(|c| c.text == text && c.kind == kind) {
            return;
        }
        self.out.push(CompletionCandidate { text, kind, rank, explanation, replace: self.replace });
    }

    fn keywords(&mut self, kws: &[&str]) {
        for kw in kws {
            self.push(kw, kw.to_string(), CandidateKind::Keyword, 2, keyword_help(kw).to_string());
        }
    }

    fn operators(&mut self) {
        let ops = [
            ("=", "equal to"),
            ("<>", "not equal to"),
            ("<", "less than"),
            ("<=", "less than or equal to"),
            (">", "greater than"),
            (">=", "greater than or equal to"),
        ];
        for (op, help) in ops {
            self.out.push(CompletionCandidate {
                text: op.to_string(),
                kind: CandidateKind::Keyword,
                rank: 1,
                explanation: format!("comparison: {help}"),
                replace: self.replace,
            });
        }
    }

    fn columns_of(&mut self, tables: &[&TableDef]) {
        for t in tables {
            for c in &t.columns {
                self.push(&c.name, quote_identifier(&c.name), CandidateKind::Column, 1, format!("column of {} ({})", t.display_name(), c.data_type.0));
            }
        }
    }

    fn aggregates(&mut self) {
        for a in AGGREGATES {
            let (text, help) = match a {
                "COUNT" => ("COUNT(*)".to_string(), "counts the rows"),
                "SUM" => ("SUM(".to_string(), "adds up the values of a column"),
                "AVG" => ("AVG(".to_string(), "averages the values of a column"),
                "MIN" => ("MIN(".to_string(), "smallest value of a column"),
                _ => ("MAX(".to_string(), "largest value of a column"),
            };
            self.push(a, text, CandidateKind::Function, 3, format!("aggregate: {help}"));
        }
    }

    fn tables(&mut self) {
        let tables: Vec<&TableDef> = self.catalog.tables.values().collect();
        for t in tables {
            let name = t.display_name();
            let text = name.split('.').map(quote_identifier).collect::<Vec<_>>().join(".");
            self.push(&name, text, CandidateKind::Table, 1, format!("table with {} columns", t.columns.len()));
        }
    }
}

/// Candidates for the word under `cursor`, using only the cursor's line.
pub fn complete(text: &str, cursor: usize, catalog: &SchemaCatalog) -> Vec<CompletionCandidate> {
    let mut cursor = cursor.min(text.len());
    while !text.is_char_boundary(cursor) {
        cursor -= 1;
    }
    let line_start = text[..cursor].rfind('\n').map_or(0, |i| i + 1);
    let line_end = text[cursor..].find('\n').map_or(text.len(), |i| cursor + i);
    let before = &text[line_start..cursor];
    let word_start = before
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_alphanumeric() || *c == '_')
        .last()
        .map_or(before.len(), |(i, _)| i);
    let prefix = &before[word_start..];
    let toks = scan(&before[..word_start]);
    let line_toks = scan(&text[line_start..line_end]);
    let mut b = Builder {
        prefix: prefix.to_string(),
        replace: Span::new(line_start + word_start, cursor),
        out: Vec::new(),
        catalog,
    };

    let in_scope: Vec<(String, Option<String>)> = scope(&line_toks);
    let resolve = |name: &str| -> Option<&TableDef> {
        in_scope
            .iter()
            .find(|(_, a)| a.as_deref() == Some(name))
            .and_then(|(t, _)| catalog.resolve_table(t))
            .or_else(|| catalog.resolve_table(name))
    };
    let scoped: Vec<&TableDef> = in_scope.iter().filter_map(|(t, _)| catalog.resolve_table(t)).collect();
    let scoped = if scoped.is_empty() { catalog.tables.values().collect() } else { scoped };

    // `alias.` narrows to that table's columns.
    if let [.., q, Tok::Sym(".")] = toks.as_slice() {
        if let Some(t) = q.name().and_then(|n| resolve(&n)) {
            b.columns_of(&[t]);
        }
        return finish(b.out);
    }

    let clause = (0..toks.len()).rev().find_map(|i| clause_of(&toks, i));
    let prev = toks.last();
    let prev2 = toks.len().checked_sub(2).map(|i| &toks[i]);
    let at_start = |kws: &[&str]| prev.is_some_and(|p| kws.iter().any(|k| p.is_kw(k)) || *p == Tok::Sym(",") || *p == Tok::Sym("("));
    match clause {
        None => {
            let kws: Vec<&str> = KEYWORDS.to_vec();
            b.keywords(&kws);
            b.push("SELECT", "SELECT columns FROM table;".to_string(), CandidateKind::Snippet, 4, "a complete query skeleton to fill in".to_string());
        }
        Some(Clause::Select) => {
            if at_start(&["SELECT", "DISTINCT"]) {
                b.push("*", "*".to_string(), CandidateKind::Column, 0, "every column of the table".to_string());
                b.columns_of(&scoped);
                b.aggregates();
                if prev.is_some_and(|p| p.is_kw("SELECT")) {
                    b.keywords(&["DISTINCT"]);
                }
            } else {
                b.keywords(&["FROM", "AS"]);
            }
        }
        Some(Clause::From | Clause::Join) => {
            if at_start(&["FROM", "JOIN"]) {
                b.tables();
            } else if clause == Some(Clause::Join) {
                b.keywords(&["ON", "AS"]);
            } else {
                b.keywords(&["WHERE", "JOIN", "GROUP BY", "ORDER BY", "AS", "UNION"]);
            }
        }
        Some(Clause::Predicate) => {
            let operand = match (prev, prev2) {
                (Some(p), _) if ["WHERE", "AND", "OR", "ON", "HAVING", "NOT"].iter().any(|k| p.is_kw(k)) || *p == Tok::Sym("(") => 0,
                (Some(p), _) if p.is_comparison() => 2,
                (Some(_), Some(p2)) if p2.is_comparison() => 3,
                (Some(p), _) if p.name().is_some() || *p == Tok::Sym(")") => 1,
                _ => 3,
            };
            match operand {
                0 => b.columns_of(&scoped),
                1 if prefix.is_empty() => b.operators(),
                1 => b.keywords(&["IS", "IN", "LIKE", "BETWEEN"]),
                2 => {}
                _ => b.keywords(&["AND", "OR", "GROUP BY", "ORDER BY"]),
            }
        }
        Some(Clause::GroupBy) => {
            if at_start(&["BY"]) {
                b.columns_of(&scoped);
            } else {
                b.keywords(&["HAVING", "ORDER BY"]);
            }
        }
        Some(Clause::OrderBy) => {
            if at_start(&["BY"]) {
                b.columns_of(&scoped);
            } else {
                b.keywords(&["ASC", "DESC"]);
            }
        }
    }
    finish(b.out)
}

fn finish(mut out: Vec<CompletionCandidate>) -> Vec<CompletionCandidate> {
    out.sort_by(|a, b| (a.rank, &a.text).cmp(&(b.rank, &b.text)));
    let mut seen = BTreeMap::new();
    out.retain(|c| seen.insert((c.text.clone(), c.kind), ()).is_none());
    out
}
