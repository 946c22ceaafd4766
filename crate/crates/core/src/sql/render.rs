//! Canonical single-line SQL rendering.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::ast::*;
use super::token::{quote_identifier, Span};
use super::{Clause, SourceMap};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum RenderError {
    #[error("the query cannot be written out: {0}")]
    InvalidAst(String),
}

/// Rendered query text plus the offsets of each clause in it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalSql {
    pub text: String,
    pub clause_spans: BTreeMap<Clause, Span>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub set_op_spans: Vec<Span>,
}

impl CanonicalSql {
    pub fn source_map(&self) -> SourceMap {
        SourceMap { clauses: self.clause_spans.clone(), set_ops: self.set_op_spans.clone() }
    }
}

/// Checks the structural invariants the renderer relies on.
pub fn validate_ast(ast: &SelectAst) -> Result<(), RenderError> {
    let invalid = |m: &str| Err(RenderError::InvalidAst(m.to_string()));
    let branches = ast.branches();
    let arity = |b: &SelectAst| (!b.has_star()).then_some(b.select_list.len());
    let head_arity = arity(ast);
    for (i, (_, b)) in branches.iter().enumerate() {
        if b.select_list.is_empty() {
            return invalid("the select list is empty");
        }
        if b.from.is_empty() {
            return invalid("the query has no FROM table");
        }
        if b.having.is_some() && b.group_by.is_empty() && !b.has_aggregate() {
            return invalid("HAVING needs GROUP BY or an aggregate in the select list");
        }
        if i > 0 {
            if !b.order_by.is_empty() {
                return invalid("ORDER BY may only follow the last branch of a UNION");
            }
            if let (Some(h), Some(a)) = (head_arity, arity(b)) {
                if h != a {
                    return invalid("UNION branches must select the same number of columns");
                }
            }
        }
        for item in &b.select_list {
            if let SelectItem::Expr { expr, alias } = item {
                validate_expr(expr)?;
                if alias.as_deref() == Some("") {
                    return invalid("an alias is empty");
                }
            }
        }
        for tr in &b.from {
            validate_factor(&tr.factor)?;
            for j in &tr.joins {
                validate_factor(&j.factor)?;
                validate_expr(&j.on)?;
            }
        }
        for e in b.where_clause.iter().chain(&b.group_by).chain(&b.having) {
            validate_expr(e)?;
        }
        for o in &b.order_by {
            validate_expr(&o.expr)?;
        }
    }
    Ok(())
}

fn validate_factor(f: &TableFactor) -> Result<(), RenderError> {
    match f {
        TableFactor::Table { name, alias } => {
            if name.name.is_empty() || name.schema.as_deref() == Some("") || alias.as_deref() == Some("") {
                return Err(RenderError::InvalidAst("a table name is empty".into()));
            }
            Ok(())
        }
        TableFactor::Derived { subquery, alias } => {
            if alias.is_empty() {
                return Err(RenderError::InvalidAst("a subquery in FROM needs an alias".into()));
            }
            validate_ast(subquery)
        }
    }
}

fn validate_expr(e: &Expr) -> Result<(), RenderError> {
    let invalid = |m: &str| Err(RenderError::InvalidAst(m.to_string()));
    match e {
        Expr::Column(c) => {
            if c.name.is_empty() || c.qualifier.as_deref() == Some("") {
                return invalid("a column name is empty");
            }
        }
        Expr::Literal { .. } => {}
        Expr::Function { name, args } => {
            if name.is_empty() {
                return invalid("a function name is empty");
            }
            match args {
                FunctionArgs::Star if name != "COUNT" => return invalid("only COUNT accepts *"),
                FunctionArgs::Star => {}
                FunctionArgs::List(a) => a.iter().try_for_each(validate_expr)?,
            }
        }
        Expr::Binary { lhs, rhs, .. } => {
            validate_expr(lhs)?;
            validate_expr(rhs)?;
        }
        Expr::Unary { operand, .. } | Expr::IsNull { operand, .. } => validate_expr(operand)?,
        Expr::Row { items } => {
            if items.len() < 2 {
                return invalid("a row constructor needs at least two values");
            }
            items.iter().try_for_each(validate_expr)?;
        }
        Expr::Subquery { query } => validate_ast(query)?,
    }
    Ok(())
}

/// Renders a query as canonical text: upper-case keywords, single spaces and
/// a terminating semicolon.
pub fn render_select(ast: &SelectAst) -> Result<CanonicalSql, RenderError> {
    validate_ast(ast)?;
    let mut w = Writer { out: String::new(), spans: BTreeMap::new(), set_ops: Vec::new() };
    w.query(ast, true);
    w.out.push(';');
    Ok(CanonicalSql { text: w.out, clause_spans: w.spans, set_op_spans: w.set_ops })
}

/// Renders a single expression.
pub fn render_expr(e: &Expr) -> String {
    let mut w = Writer { out: String::new(), spans: BTreeMap::new(), set_ops: Vec::new() };
    w.expr(e);
    w.out
}

struct Writer {
    out: String,
    spans: BTreeMap<Clause, Span>,
    set_ops: Vec<Span>,
}

impl Writer {
    fn clause<F: FnOnce(&mut Self)>(&mut self, record: bool, clause: Clause, body: F) {
        if !self.out.is_empty() {
            self.out.push(' ');
        }
        let start = self.out.len();
        self.out.push_str(clause.keyword());
        self.out.push(' ');
        body(self);
        if record {
            self.spans.insert(clause, Span::new(start, self.out.len()));
        }
    }

    fn query(&mut self, ast: &SelectAst, top: bool) {
        for (i, (op, block)) in ast.branches().into_iter().enumerate() {
            if let Some(op) = op {
                self.out.push(' ');
                let start = self.out.len();
                self.out.push_str(op.sql());
                if top {
                    self.set_ops.push(Span::new(start, self.out.len()));
                }
            }
            self.block(block, top && i == 0);
        }
        if !ast.order_by.is_empty() {
            self.clause(top, Clause::OrderBy, |w| {
                w.list(&ast.order_by, |w, o| {
                    w.expr(&o.expr);
                    if o.direction == SortDirection::Descending {
                        w.out.push_str(" DESC");
                    }
                })
            });
        }
    }

    fn block(&mut self, b: &SelectAst, record: bool) {
        self.clause(record, Clause::Select, |w| {
            if b.distinct {
                w.out.push_str("DISTINCT ");
            }
            w.list(&b.select_list, |w, item| match item {
                SelectItem::Wildcard => w.out.push('*'),
                SelectItem::Expr { expr, alias } => {
                    w.expr(expr);
                    if let Some(a) = alias {
                        w.out.push_str(" AS ");
                        w.out.push_str(&quote_identifier(a));
                    }
                }
            })
        });
        self.clause(record, Clause::From, |w| {
            w.list(&b.from, |w, tr| {
                w.factor(&tr.factor);
                for j in &tr.joins {
                    w.out.push_str(" JOIN ");
                    w.factor(&j.factor);
                    w.out.push_str(" ON ");
                    w.expr(&j.on);
                }
            })
        });
        if let Some(e) = &b.where_clause {
            self.clause(record, Clause::Where, |w| w.expr(e));
        }
        if !b.group_by.is_empty() {
            self.clause(record, Clause::GroupBy, |w| w.list(&b.group_by, |w, e| w.expr(e)));
        }
        if let Some(e) = &b.having {
            self.clause(record, Clause::Having, |w| w.expr(e));
        }
    }

    fn factor(&mut self, f: &TableFactor) {
        match f {
            TableFactor::Table { name, alias } => {
                if let Some(s) = &name.schema {
                    self.out.push_str(&quote_identifier(s));
                    self.out.push('.');
                }
                self.out.push_str(&quote_identifier(&name.name));
                if let Some(a) = alias {
                    self.out.push_str(" AS ");
                    self.out.push_str(&quote_identifier(a));
                }
            }
            TableFactor::Derived { subquery, alias } => {
                self.out.push('(');
                self.nested(subquery);
                self.out.push_str(") AS ");
                self.out.push_str(&quote_identifier(alias));
            }
        }
    }

    fn nested(&mut self, q: &SelectAst) {
        let mut inner = Writer { out: String::new(), spans: BTreeMap::new(), set_ops: Vec::new() };
        inner.query(q, false);
        self.out.push_str(&inner.out);
    }

    fn list<T>(&mut self, items: &[T], mut f: impl FnMut(&mut Self, &T)) {
        for (i, item) in items.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            f(self, item);
        }
    }

    fn wrapped(&mut self, e: &Expr, parens: bool) {
        if parens {
            self.out.push('(');
            self.expr(e);
            self.out.push(')');
        } else {
            self.expr(e);
        }
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Column(c) => {
                if let Some(q) = &c.qualifier {
                    self.out.push_str(&quote_identifier(q));
                    self.out.push('.');
                }
                self.out.push_str(&quote_identifier(&c.name));
            }
            Expr::Literal { value } => self.literal(value),
            Expr::Function { name, args } => {
                if is_aggregate_name(name) {
                    self.out.push_str(&name.to_ascii_uppercase());
                } else {
                    self.out.push_str(&quote_identifier(name));
                }
                self.out.push('(');
                match args {
                    FunctionArgs::Star => self.out.push('*'),
                    FunctionArgs::List(a) => self.list(a, |w, x| w.expr(x)),
                }
                self.out.push(')');
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                let non_assoc = p == Precedence::Comparison;
                let lp = lhs.precedence();
                let rp = rhs.precedence();
                self.wrapped(lhs, lp < p || (non_assoc && lp == p));
                self.out.push(' ');
                self.out.push_str(op.symbol());
                self.out.push(' ');
                self.wrapped(rhs, rp <= p);
            }
            Expr::Unary { op: UnaryOp::Not, operand } => {
                self.out.push_str("NOT ");
                self.wrapped(operand, operand.precedence() < Precedence::Not);
            }
            Expr::Unary { op, operand } => {
                self.out.push(if *op == UnaryOp::Neg { '-' } else { '~' });
                let starts_with_minus = matches!(
                    &**operand,
                    Expr::Unary { op: UnaryOp::Neg, .. }
                        | Expr::Literal { value: Literal::Integer(i64::MIN..=-1) }
                ) || matches!(&**operand, Expr::Literal { value: Literal::Decimal(d) } if d.starts_with('-'));
                self.wrapped(operand, operand.precedence() < Precedence::Unary || starts_with_minus);
            }
            Expr::IsNull { operand, negated } => {
                self.wrapped(operand, operand.precedence() < Precedence::Is);
                self.out.push_str(if *negated { " IS NOT NULL" } else { " IS NULL" });
            }
            Expr::Row { items } => {
                self.out.push('(');
                self.list(items, |w, x| w.expr(x));
                self.out.push(')');
            }
            Expr::Subquery { query } => {
                self.out.push('(');
                self.nested(query);
                self.out.push(')');
            }
        }
    }

    fn literal(&mut self, l: &Literal) {
        match l {
            Literal::Integer(v) => self.out.push_str(&v.to_string()),
            Literal::Decimal(d) => self.out.push_str(d),
            Literal::String(s) => {
                self.out.push('\'');
                self.out.push_str(&s.replace('\'', "''"));
                self.out.push('\'');
            }
            Literal::Boolean(b) => self.out.push_str(if *b { "TRUE" } else { "FALSE" }),
            Literal::Null => self.out.push_str("NULL"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::parse_select;

    #[test]
    fn explicit_columns() {
        let ast = SelectAst::simple(
            ["col_1", "col_2", "col_3", "col_4"].iter().map(|c| SelectItem::column(c)).collect(),
            "table_name",
        );
        assert_eq!(render_select(&ast).unwrap().text, "SELECT col_1, col_2, col_3, col_4 FROM table_name;");
    }

    #[test]
    fn star() {
        let ast = SelectAst::simple(vec![SelectItem::Wildcard], "table_name");
        assert_eq!(render_select(&ast).unwrap().text, "SELECT * FROM table_name;");
    }

    #[test]
    fn having_without_grouping_is_invalid() {
        let mut ast = SelectAst::simple(vec![SelectItem::column("a")], "t");
        ast.having = Some(Expr::binary(BinaryOp::Gt, Expr::column("a"), Expr::int(1)));
        assert!(matches!(render_select(&ast), Err(RenderError::InvalidAst(_))));
    }

    #[test]
    fn clause_spans_start_with_keywords() {
        let ast = parse_select(
            "select distinct a, count(*) from t join u on t.id = u.id where a > 1 group by a having count(*) > 2 order by a desc",
        )
        .unwrap();
        let c = render_select(&ast).unwrap();
        assert_eq!(c.clause_spans.len(), 6);
        for (clause, span) in &c.clause_spans {
            assert!(c.text[span.start..span.end].starts_with(clause.keyword()), "{clause:?}");
        }
    }

    #[test]
    fn quotes_keywords_and_odd_names() {
        let ast = SelectAst::simple(vec![SelectItem::column("order"), SelectItem::column("First Name")], "t");
        assert_eq!(render_select(&ast).unwrap().text, "SELECT \"order\", \"First Name\" FROM t;");
    }

    #[test]
    fn parenthesizes_by_precedence() {
        let q = parse_select("SELECT (a + b) * c, a - (b - c), NOT (a AND b), -(-3) FROM t WHERE (a OR b) AND c").unwrap();
        assert_eq!(
            render_select(&q).unwrap().text,
            "SELECT (a + b) * c, a - (b - c), NOT (a AND b), -(-3) FROM t WHERE (a OR b) AND c;"
        );
    }
}
