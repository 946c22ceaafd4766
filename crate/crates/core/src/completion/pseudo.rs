//! A small fixed grammar of English-like requests, and SQL generation from it.

use serde::{Deserialize, Serialize};

use crate::catalog::SchemaCatalog;
use crate::sql::{render_select, BinaryOp, CanonicalSql, Expr, Literal, OrderItem, SelectAst, SelectItem, SortDirection, TableRef};

pub const GRAMMAR_VERSION: u32 = 1;

pub const CHEAT_SHEET: &str = "Pseudo-code grammar, version 1:
  <verb> <columns> from <table> [where <condition> [and <condition> ...]] [grouped by <column>] [sorted by <column> [ascending | descending]]
  verbs: get, show, find, list, select
  columns: all, or names separated by commas or \"and\"
  condition: <column> <comparison> <value>
  comparisons: greater than (>), less than (<), equals or is (=), not or is not (<>), or one of = <> != < <= > >=
  example: get name, age from users where age greater than 30 sorted by age descending";

const VERBS: [&str; 5] = ["get", "show", "find", "list", "select"];

/// Comparator phrases, longest first so "is not" wins over "is".
const COMPARATORS: [(&[&str], BinaryOp); 16] = [
    (&["is", "greater", "than"], BinaryOp::Gt),
    (&["is", "less", "than"], BinaryOp::Lt),
    (&["greater", "than"], BinaryOp::Gt),
    (&["less", "than"], BinaryOp::Lt),
    (&["is", "not"], BinaryOp::NotEq),
    (&["equals"], BinaryOp::Eq),
    (&["is"], BinaryOp::Eq),
    (&["not"], BinaryOp::NotEq),
    (&["="], BinaryOp::Eq),
    (&["<>"], BinaryOp::NotEq),
    (&["!="], BinaryOp::NotEq),
    (&["<"], BinaryOp::Lt),
    (&["<="], BinaryOp::LtEq),
    (&[">"], BinaryOp::Gt),
    (&[">="], BinaryOp::GtEq),
    (&["=="], BinaryOp::Eq),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PseudoAction {
    #[default]
    Select,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projections {
    All,
    Columns(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoFilter {
    pub column: String,
    /// The phrase as written, e.g. "greater than".
    pub comparator_word: String,
    pub comparator: BinaryOp,
    pub value: String,
    /// The value was written in quotes and is always text.
    #[serde(default)]
    pub quoted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoSort {
    pub column: String,
    pub direction: SortDirection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoQuery {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub action: PseudoAction,
    pub projections: Projections,
    pub source: String,
    #[serde(default)]
    pub filters: Vec<PseudoFilter>,
    #[serde(default)]
    pub sort: Option<PseudoSort>,
    #[serde(default)]
    pub grouping: Option<String>,
}

fn default_version() -> u32 {
    GRAMMAR_VERSION
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum PseudoError {
    #[error("could not understand {} (expected {expected})\n{cheat_sheet}", describe(word))]
    UnrecognizedPseudocode {
        /// Empty when the text ended too early.
        word: String,
        position: usize,
        expected: String,
        cheat_sheet: String,
    },
}

fn describe(word: &str) -> String {
    if word.is_empty() {
        "the end of the text".to_string()
    } else {
        format!("\"{word}\"")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Word {
    text: String,
    pos: usize,
    quoted: bool,
}

impl Word {
    fn is(&self, w: &str) -> bool {
        !self.quoted && self.text.eq_ignore_ascii_case(w)
    }
}

fn words(text: &str) -> Vec<Word> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
        } else if c == ',' {
            out.push(Word { text: ",".into(), pos: i, quoted: false });
            it.next();
        } else if c == '\'' || c == '"' {
            it.next();
            let mut s = String::new();
            for (_, d) in it.by_ref() {
                if d == c {
                    break;
                }
                s.push(d);
            }
            out.push(Word { text: s, pos: i, quoted: true });
        } else if "<>=!".contains(c) {
            let mut s = String::new();
            while let Some(&(_, d)) = it.peek() {
                if !"<>=!".contains(d) {
                    break;
                }
                s.push(d);
                it.next();
            }
            out.push(Word { text: s, pos: i, quoted: false });
        } else {
            let mut s = String::new();
            while let Some(&(_, d)) = it.peek() {
                if d.is_whitespace() || d == ',' || "<>=!'\"".contains(d) {
                    break;
                }
                s.push(d);
                it.next();
            }
            out.push(Word { text: s, pos: i, quoted: false });
        }
    }
    out
}

struct Parser {
    words: Vec<Word>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Word> {
        self.words.get(self.at)
    }

    fn fail<T>(&self, expected: &str) -> Result<T, PseudoError> {
        let (word, position) = match self.peek() {
            Some(w) => (w.text.clone(), w.pos),
            None => (String::new(), self.end),
        };
        Err(PseudoError::UnrecognizedPseudocode { word, position, expected: expected.to_string(), cheat_sheet: CHEAT_SHEET.to_string() })
    }

    fn eat(&mut self, w: &str) -> bool {
        if self.peek().is_some_and(|x| x.is(w)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, w: &str) -> Result<(), PseudoError> {
        if self.eat(w) {
            Ok(())
        } else {
            self.fail(&format!("\"{w}\""))
        }
    }

    /// A column or table word: not quoted, not a grammar word or comparator.
    fn name(&mut self, what: &str) -> Result<String, PseudoError> {
        const RESERVED: [&str; 8] = ["from", "where", "and", "sorted", "ordered", "grouped", "by", ","];
        match self.peek() {
            Some(w) if !w.quoted && !RESERVED.iter().any(|r| w.is(r)) && !w.text.starts_with(['<', '>', '=', '!']) => {
                let t = w.text.clone();
                self.at += 1;
                Ok(t)
            }
            _ => self.fail(what),
        }
    }

    fn comparator(&mut self) -> Result<(String, BinaryOp), PseudoError> {
        for (phrase, op) in COMPARATORS {
            let matches = phrase.iter().enumerate().all(|(k, p)| self.words.get(self.at + k).is_some_and(|w| w.is(p)));
            if matches {
                self.at += phrase.len();
                return Ok((phrase.join(" "), op));
            }
        }
        self.fail("a comparison such as \"greater than\", \"less than\", \"equals\", \"is\" or \"not\"")
    }

    fn value(&mut self) -> Result<(String, bool), PseudoError> {
        match self.peek() {
            Some(w) if w.quoted || (w.text != "," && !w.is("and")) => {
                let v = (w.text.clone(), w.quoted);
                self.at += 1;
                Ok(v)
            }
            _ => self.fail("a value to compare with"),
        }
    }
}

/// Parses one request in the fixed pseudo-code grammar.
pub fn parse_pseudocode(text: &str) -> Result<PseudoQuery, PseudoError> {
    let mut p = Parser { words: words(text), at: 0, end: text.len() };
    if !VERBS.iter().any(|v| p.eat(v)) {
        return p.fail("a verb: get, show, find, list or select");
    }
    let projections = if p.eat("all") || p.eat("everything") {
        Projections::All
    } else {
        let mut cols = vec![p.name("a column name or \"all\"")?];
        while p.eat(",") || p.eat("and") {
            cols.push(p.name("another column name")?);
        }
        Projections::Columns(cols)
    };
    p.expect("from")?;
    let source = p.name("a table name after \"from\"")?;
    let mut q = PseudoQuery { version: GRAMMAR_VERSION, action: PseudoAction::Select, projections, source, filters: Vec::new(), sort: None, grouping: None };
    let mut seen_where = false;
    while p.peek().is_some() {
        if !seen_where && p.eat("where") {
            seen_where = true;
            loop {
                let column = p.name("a column name to test")?;
                let (comparator_word, comparator) = p.comparator()?;
                let (value, quoted) = p.value()?;
                q.filters.push(PseudoFilter { column, comparator_word, comparator, value, quoted });
                if !p.eat("and") {
                    break;
                }
            }
        } else if q.sort.is_none() && (p.eat("sorted") || p.eat("ordered")) {
            p.expect("by")?;
            let column = p.name("a column to sort by")?;
            let direction = if p.eat("descending") || p.eat("desc") {
                SortDirection::Descending
            } else {
                let _ = p.eat("ascending") || p.eat("asc");
                SortDirection::Ascending
            };
            q.sort = Some(PseudoSort { column, direction });
        } else if q.grouping.is_none() && p.eat("grouped") {
            p.expect("by")?;
            q.grouping = Some(p.name("a column to group by")?);
        } else {
            return p.fail("\"where\", \"grouped by\", \"sorted by\" or the end of the request");
        }
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generated {
    pub sql: CanonicalSql,
    pub ast: SelectAst,
    /// Unknown tables or columns; the SQL is produced regardless.
    pub warnings: Vec<String>,
}

fn value_expr(f: &PseudoFilter) -> Expr {
    let v = &f.value;
    if f.quoted {
        return Expr::string(v);
    }
    if let Ok(i) = v.parse::<i64>() {
        return Expr::int(i);
    }
    let decimal = v.split_once('.').is_some_and(|(a, b)| !a.is_empty() && !b.is_empty() && (a.bytes().chain(b.bytes())).all(|c| c.is_ascii_digit()));
    if decimal {
        return Expr::Literal { value: Literal::Decimal(v.clone()) };
    }
    match v.to_ascii_lowercase().as_str() {
        "true" => Expr::Literal { value: Literal::Boolean(true) },
        "false" => Expr::Literal { value: Literal::Boolean(false) },
        _ => Expr::string(v),
    }
}

fn filter_expr(f: &PseudoFilter) -> Expr {
    let column = Expr::column(&f.column);
    let null = !f.quoted && f.value.eq_ignore_ascii_case("null");
    match (null, f.comparator) {
        (true, BinaryOp::Eq) => Expr::IsNull { operand: Box::new(column), negated: false },
        (true, BinaryOp::NotEq) => Expr::IsNull { operand: Box::new(column), negated: true },
        _ => Expr::binary(f.comparator, column, value_expr(f)),
    }
}

/// Builds and renders the query a pseudo-code request describes.
pub fn generate_from_pseudocode(pq: &PseudoQuery, catalog: &SchemaCatalog) -> Generated {
    let items = match &pq.projections {
        Projections::All => vec![SelectItem::Wildcard],
        Projections::Columns(cols) => cols.iter().map(|c| SelectItem::column(c)).collect(),
    };
    let mut ast = SelectAst::simple(items, &pq.source);
    ast.from = vec![TableRef::table(&pq.source)];
    ast.where_clause = Expr::conjoin(pq.filters.iter().map(filter_expr));
    ast.group_by = pq.grouping.iter().map(|g| Expr::column(g)).collect();
    ast.order_by = pq.sort.iter().map(|s| OrderItem { expr: Expr::column(&s.column), direction: s.direction }).collect();

    let mut warnings = Vec::new();
    let mentioned = match &pq.projections {
        Projections::All => Vec::new(),
        Projections::Columns(c) => c.clone(),
    }
    .into_iter()
    .chain(pq.filters.iter().map(|f| f.column.clone()))
    .chain(pq.grouping.clone())
    .chain(pq.sort.as_ref().map(|s| s.column.clone()));
    match catalog.resolve_table(&pq.source) {
        None => warnings.push(format!("table {} not found in catalog", pq.source)),
        Some(t) => {
            let mut reported = Vec::new();
            for c in mentioned {
                if t.column(&c).is_none() && !reported.contains(&c) {
                    warnings.push(format!("column {c} not found in table {}", pq.source));
                    reported.push(c);
                }
            }
        }
    }
    if let Some(g) = &pq.grouping {
        match &pq.projections {
            Projections::All => warnings.push(format!("all columns are selected but only {g} is grouped; PostgreSQL will reject the query")),
            Projections::Columns(cols) => {
                for c in cols.iter().filter(|c| *c != g) {
                    warnings.push(format!("{c} is neither grouped nor aggregated; PostgreSQL will reject the query"));
                }
            }
        }
    }
    let sql = render_select(&ast).expect("generated queries have a select list and a table");
    Generated { sql, ast, warnings }
}
