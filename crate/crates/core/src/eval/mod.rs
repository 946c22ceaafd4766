//! In-memory bag-semantics evaluator for the supported SELECT subset.
//!
//! Comparisons follow three-valued logic: any comparison with NULL is unknown
//! and WHERE/HAVING/ON keep only rows whose condition is true. Both operands
//! of AND/OR are always evaluated, so errors do not depend on conjunct order.

pub mod random;
pub mod value;

pub use random::{assert_equivalent, random_db, GenColumn, GenKind, GenSchema, GenTable, Verdict};
pub use value::{cmp_rows, FixtureError, MiniDb, Relation, Row, Value};

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use crate::sql::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("There is no table named “{name}” in the sandbox data.")]
    UnknownTable { name: String },
    #[error("No table in the query has a column named “{name}”.")]
    UnknownColumn { name: String },
    #[error("“{name}” could come from more than one table; add the table name in front, like t.{name}.")]
    AmbiguousColumn { name: String },
    #[error("The name “{name}” is used for more than one table in FROM; give one of them an alias.")]
    DuplicateTableName { name: String },
    #[error("“{op}” cannot combine a {left} value with a {right} value.")]
    TypeMismatch { op: String, left: String, right: String },
    #[error("Division by zero.")]
    DivisionByZero,
    #[error("The result of “{op}” is too large.")]
    NumericOverflow { op: String },
    #[error("A subquery used as a value returned more than one row.")]
    SubqueryReturnedMultipleRows,
    #[error("A subquery returned {found} columns where {expected} were needed.")]
    SubqueryColumnCount { expected: usize, found: usize },
    #[error("“{name}” must appear in GROUP BY or be used inside an aggregate such as COUNT or MAX.")]
    UngroupedColumn { name: String },
    #[error("Aggregates such as {name} cannot be used in WHERE, ON or GROUP BY; use HAVING instead.")]
    MisplacedAggregate { name: String },
    #[error("The sandbox does not know the function “{name}”.")]
    UnknownFunction { name: String },
    #[error("{name} takes {expected} argument(s) but was given {found}.")]
    WrongArgumentCount { name: String, expected: usize, found: usize },
    #[error("Each part of a UNION must return the same number of columns ({expected} versus {found}).")]
    ArityMismatch { expected: usize, found: usize },
    #[error("ORDER BY position {position} is out of range; the result has {columns} columns.")]
    OrderPositionOutOfRange { position: i64, columns: usize },
    #[error("ORDER BY after a UNION can only use output column names or positions.")]
    UnionOrderBy,
    #[error("Rows compared with {op} must have the same number of values.")]
    RowArity { op: String },
    #[error("A condition must be true or false, but this one produced a {kind} value.")]
    NotBoolean { kind: String },
}

type Res<T> = Result<T, EvalError>;

/// Output column names, and each row with its ORDER BY sort keys.
type Block = (Vec<String>, Vec<(Row, Vec<Value>)>);

/// Evaluates `ast` against `db`, returning rows in ORDER BY order when one is
/// given and in an unspecified but deterministic order otherwise.
pub fn eval(ast: &SelectAst, db: &MiniDb) -> Res<Relation> {
    Evaluator { db }.query(ast, None)
}

struct Binding {
    name: String,
    columns: Vec<String>,
    offset: usize,
}

#[derive(Default)]
struct Layout {
    bindings: Vec<Binding>,
    width: usize,
}

impl Layout {
    fn push(&mut self, name: &str, columns: Vec<String>) -> Res<()> {
        if self.bindings.iter().any(|b| b.name == name) {
            return Err(EvalError::DuplicateTableName { name: name.into() });
        }
        let n = columns.len();
        self.bindings.push(Binding { name: name.into(), columns, offset: self.width });
        self.width += n;
        Ok(())
    }

    fn resolve(&self, c: &ColumnRef) -> Res<Option<usize>> {
        let mut found = None;
        for b in &self.bindings {
            if c.qualifier.as_deref().is_some_and(|q| q != b.name) {
                continue;
            }
            if let Some(i) = b.columns.iter().position(|n| *n == c.name) {
                if found.is_some() {
                    return Err(EvalError::AmbiguousColumn { name: c.name.clone() });
                }
                found = Some(b.offset + i);
            }
        }
        Ok(found)
    }

    fn all_columns(&self) -> Vec<String> {
        self.bindings.iter().flat_map(|b| b.columns.iter().cloned()).collect()
    }
}

#[derive(Clone, Copy)]
struct Env<'a> {
    layout: &'a Layout,
    row: &'a [Value],
    parent: Option<&'a Env<'a>>,
}

impl Env<'_> {
    fn lookup(&self, c: &ColumnRef) -> Res<Value> {
        match self.layout.resolve(c)? {
            Some(i) => Ok(self.row[i].clone()),
            None => match self.parent {
                Some(p) => p.lookup(c),
                None => Err(EvalError::UnknownColumn { name: render_expr(&Expr::Column(c.clone())) }),
            },
        }
    }
}

struct Group<'a> {
    layout: &'a Layout,
    exprs: &'a [Expr],
    /// Source positions of plain-column GROUP BY entries.
    positions: Vec<Option<usize>>,
    key: Vec<Value>,
    rows: Vec<&'a [Value]>,
    parent: Option<&'a Env<'a>>,
}

#[derive(Clone, Copy)]
enum Ctx<'a> {
    Row(&'a Env<'a>),
    Group(&'a Group<'a>),
}

struct Evaluator<'d> {
    db: &'d MiniDb,
}

fn truth(v: &Value) -> Res<Option<bool>> {
    match v {
        Value::Bool(b) => Ok(Some(*b)),
        Value::Null => Ok(None),
        other => Err(EvalError::NotBoolean { kind: other.kind_name().into() }),
    }
}

fn output_name(item: &SelectItem) -> String {
    match item {
        SelectItem::Expr { alias: Some(a), .. } => a.clone(),
        SelectItem::Expr { expr: Expr::Column(c), .. } => c.name.clone(),
        SelectItem::Expr { expr: Expr::Function { name, .. }, .. } => name.to_ascii_lowercase(),
        _ => "?column?".into(),
    }
}

fn dedupe(rows: Vec<(Row, Vec<Value>)>) -> Vec<(Row, Vec<Value>)> {
    let mut seen = HashSet::new();
    rows.into_iter().filter(|(r, _)| seen.insert(r.clone())).collect()
}

fn mismatch(op: &str, l: &Value, r: &Value) -> EvalError {
    EvalError::TypeMismatch { op: op.into(), left: l.kind_name().into(), right: r.kind_name().into() }
}

impl<'d> Evaluator<'d> {
    fn query(&self, ast: &SelectAst, parent: Option<&Env<'_>>) -> Res<Relation> {
        if ast.set_op.is_none() {
            let (columns, rows) = self.block(ast, parent, &ast.order_by)?;
            return Ok(Relation { columns, rows: sort_rows(rows, &ast.order_by) });
        }
        let mut columns = Vec::new();
        let mut acc: Vec<(Row, Vec<Value>)> = Vec::new();
        for (kind, branch) in ast.branches() {
            let (cols, rows) = self.block(branch, parent, &[])?;
            match kind {
                None => {
                    columns = cols;
                    acc = rows;
                }
                Some(kind) => {
                    if cols.len() != columns.len() {
                        return Err(EvalError::ArityMismatch { expected: columns.len(), found: cols.len() });
                    }
                    acc.extend(rows);
                    if kind == SetOpKind::Union {
                        acc = dedupe(acc);
                    }
                }
            }
        }
        let rows: Vec<(Row, Vec<Value>)> = acc
            .into_iter()
            .map(|(row, _)| {
                let keys = ast
                    .order_by
                    .iter()
                    .map(|o| output_key(&o.expr, &columns, &row)?.ok_or(EvalError::UnionOrderBy))
                    .collect::<Res<Vec<_>>>()?;
                Ok((row, keys))
            })
            .collect::<Res<_>>()?;
        Ok(Relation { rows: sort_rows(rows, &ast.order_by), columns })
    }

    /// One query block without set operations. Returns output rows paired
    /// with their ORDER BY keys.
    fn block(&self, ast: &SelectAst, parent: Option<&Env<'_>>, order_by: &[OrderItem]) -> Res<Block> {
        let (layout, source) = self.from(&ast.from, parent)?;
        let mut kept = Vec::new();
        for row in &source {
            let env = Env { layout: &layout, row, parent };
            if let Some(w) = &ast.where_clause {
                if truth(&self.expr(w, Ctx::Row(&env))?)? != Some(true) {
                    continue;
                }
            }
            kept.push(row.as_slice());
        }

        let columns: Vec<String> = ast
            .select_list
            .iter()
            .flat_map(|i| match i {
                SelectItem::Wildcard => layout.all_columns(),
                other => vec![output_name(other)],
            })
            .collect();

        let mut out = Vec::new();
        if ast.is_grouped() {
            for g in self.groups(ast, &layout, kept, parent)? {
                if let Some(h) = &ast.having {
                    if truth(&self.expr(h, Ctx::Group(&g))?)? != Some(true) {
                        continue;
                    }
                }
                let row = self.project(ast, &layout, Ctx::Group(&g))?;
                let keys = self.order_keys(order_by, &columns, &row, Ctx::Group(&g))?;
                out.push((row, keys));
            }
        } else {
            for row in kept {
                let env = Env { layout: &layout, row, parent };
                let out_row = self.project(ast, &layout, Ctx::Row(&env))?;
                let keys = self.order_keys(order_by, &columns, &out_row, Ctx::Row(&env))?;
                out.push((out_row, keys));
            }
        }
        if ast.distinct {
            out = dedupe(out);
        }
        Ok((columns, out))
    }

    fn project(&self, ast: &SelectAst, layout: &Layout, ctx: Ctx<'_>) -> Res<Row> {
        let mut row = Vec::new();
        for item in &ast.select_list {
            match item {
                SelectItem::Wildcard => {
                    for b in &layout.bindings {
                        for c in &b.columns {
                            let cref = ColumnRef { qualifier: Some(b.name.clone()), name: c.clone() };
                            row.push(self.expr(&Expr::Column(cref), ctx)?);
                        }
                    }
                }
                SelectItem::Expr { expr, .. } => row.push(self.expr(expr, ctx)?),
            }
        }
        Ok(row)
    }

    fn order_keys(&self, order_by: &[OrderItem], columns: &[String], row: &[Value], ctx: Ctx<'_>) -> Res<Vec<Value>> {
        order_by
            .iter()
            .map(|o| match output_key(&o.expr, columns, row)? {
                Some(v) => Ok(v),
                None => self.expr(&o.expr, ctx),
            })
            .collect()
    }

    fn groups<'a>(&self, ast: &'a SelectAst, layout: &'a Layout, rows: Vec<&'a [Value]>, parent: Option<&'a Env<'a>>) -> Res<Vec<Group<'a>>> {
        let positions = ast
            .group_by
            .iter()
            .map(|e| match e {
                Expr::Column(c) => layout.resolve(c),
                _ => Ok(None),
            })
            .collect::<Res<Vec<_>>>()?;
        let mut groups: Vec<Group<'a>> = Vec::new();
        let mut index: HashMap<Vec<Value>, usize> = HashMap::new();
        if ast.group_by.is_empty() {
            groups.push(Group { layout, exprs: &ast.group_by, positions, key: Vec::new(), rows, parent });
            return Ok(groups);
        }
        for row in rows {
            let env = Env { layout, row, parent };
            let key = ast.group_by.iter().map(|e| self.expr(e, Ctx::Row(&env))).collect::<Res<Vec<_>>>()?;
            match index.get(&key) {
                Some(&i) => groups[i].rows.push(row),
                None => {
                    index.insert(key.clone(), groups.len());
                    groups.push(Group { layout, exprs: &ast.group_by, positions: positions.clone(), key, rows: vec![row], parent });
                }
            }
        }
        Ok(groups)
    }

    fn from(&self, from: &[TableRef], parent: Option<&Env<'_>>) -> Res<(Layout, Vec<Row>)> {
        let mut layout = Layout::default();
        let mut rows: Vec<Row> = vec![Vec::new()];
        for tr in from {
            let factors = std::iter::once((&tr.factor, None)).chain(tr.joins.iter().map(|j| (&j.factor, Some(&j.on))));
            for (factor, on) in factors {
                let rel = self.factor(factor)?;
                layout.push(factor.binding_name(), rel.columns)?;
                let mut next = Vec::new();
                for left in &rows {
                    for right in &rel.rows {
                        let mut r = left.clone();
                        r.extend(right.iter().cloned());
                        if let Some(on) = on {
                            let env = Env { layout: &layout, row: &r, parent };
                            if truth(&self.expr(on, Ctx::Row(&env))?)? != Some(true) {
                                continue;
                            }
                        }
                        next.push(r);
                    }
                }
                rows = next;
            }
        }
        Ok((layout, rows))
    }

    fn factor(&self, f: &TableFactor) -> Res<Relation> {
        match f {
            TableFactor::Table { name, .. } => {
                let found = self.db.tables.get(&name.key()).or_else(|| match name.schema.as_deref() {
                    Some(crate::catalog::DEFAULT_SCHEMA) => self.db.tables.get(&name.name),
                    _ => None,
                });
                found.cloned().ok_or_else(|| EvalError::UnknownTable { name: name.key() })
            }
            TableFactor::Derived { subquery, .. } => self.query(subquery, None),
        }
    }

    fn expr(&self, e: &Expr, ctx: Ctx<'_>) -> Res<Value> {
        if let Ctx::Group(g) = ctx {
            if !matches!(e, Expr::Column(_)) {
                if let Some(i) = g.exprs.iter().position(|x| x == e) {
                    return Ok(g.key[i].clone());
                }
            }
        }
        match e {
            Expr::Column(c) => match ctx {
                Ctx::Row(env) => env.lookup(c),
                Ctx::Group(g) => match g.layout.resolve(c)? {
                    Some(p) => match g.positions.iter().position(|q| *q == Some(p)) {
                        Some(i) => Ok(g.key[i].clone()),
                        None => Err(EvalError::UngroupedColumn { name: c.name.clone() }),
                    },
                    None => match g.parent {
                        Some(env) => env.lookup(c),
                        None => Err(EvalError::UnknownColumn { name: c.name.clone() }),
                    },
                },
            },
            Expr::Literal { value } => Ok(literal(value)),
            Expr::Function { name, args } if is_aggregate_name(name) => match ctx {
                Ctx::Row(_) => Err(EvalError::MisplacedAggregate { name: name.to_ascii_uppercase() }),
                Ctx::Group(g) => self.aggregate(name, args, g),
            },
            Expr::Function { name, args } => {
                let FunctionArgs::List(args) = args else {
                    return Err(EvalError::UnknownFunction { name: format!("{name}(*)") });
                };
                let vals = args.iter().map(|a| self.expr(a, ctx)).collect::<Res<Vec<_>>>()?;
                scalar_function(name, vals)
            }
            Expr::Binary { op, lhs, rhs } => {
                if matches!(op, BinaryOp::Eq | BinaryOp::NotEq) && (matches!(**lhs, Expr::Row { .. }) || matches!(**rhs, Expr::Row { .. })) {
                    return self.row_compare(*op, lhs, rhs, ctx);
                }
                let l = self.expr(lhs, ctx)?;
                let r = self.expr(rhs, ctx)?;
                binary(*op, l, r)
            }
            Expr::Unary { op, operand } => {
                let v = self.expr(operand, ctx)?;
                match (op, v) {
                    (_, Value::Null) => Ok(Value::Null),
                    (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                    (UnaryOp::Neg, Value::Int(i)) => i.checked_neg().map(Value::Int).ok_or(EvalError::NumericOverflow { op: "-".into() }),
                    (UnaryOp::Neg, Value::Decimal(d)) => Ok(Value::decimal(-d)),
                    (UnaryOp::BitNot, Value::Int(i)) => Ok(Value::Int(!i)),
                    (op, v) => Err(EvalError::TypeMismatch {
                        op: match op {
                            UnaryOp::Not => "NOT",
                            UnaryOp::Neg => "-",
                            UnaryOp::BitNot => "~",
                        }
                        .into(),
                        left: v.kind_name().into(),
                        right: v.kind_name().into(),
                    }),
                }
            }
            Expr::IsNull { operand, negated } => Ok(Value::Bool(self.expr(operand, ctx)?.is_null() != *negated)),
            Expr::Row { .. } => Err(EvalError::RowArity { op: "a value".into() }),
            Expr::Subquery { query } => {
                let rel = self.subquery(query, ctx)?;
                if rel.columns.len() != 1 {
                    return Err(EvalError::SubqueryColumnCount { expected: 1, found: rel.columns.len() });
                }
                match rel.rows.len() {
                    0 => Ok(Value::Null),
                    1 => Ok(rel.rows[0][0].clone()),
                    _ => Err(EvalError::SubqueryReturnedMultipleRows),
                }
            }
        }
    }

    fn subquery(&self, q: &SelectAst, ctx: Ctx<'_>) -> Res<Relation> {
        match ctx {
            Ctx::Row(env) => self.query(q, Some(env)),
            Ctx::Group(g) => {
                let nulls = vec![Value::Null; g.layout.width];
                let row = g.rows.first().copied().unwrap_or(&nulls);
                let env = Env { layout: g.layout, row, parent: g.parent };
                self.query(q, Some(&env))
            }
        }
    }

    fn row_values(&self, e: &Expr, n: Option<usize>, ctx: Ctx<'_>) -> Res<Vec<Value>> {
        match e {
            Expr::Row { items } => items.iter().map(|i| self.expr(i, ctx)).collect(),
            Expr::Subquery { query } => {
                let rel = self.subquery(query, ctx)?;
                let want = n.unwrap_or(rel.columns.len());
                if rel.columns.len() != want {
                    return Err(EvalError::SubqueryColumnCount { expected: want, found: rel.columns.len() });
                }
                match rel.rows.len() {
                    0 => Ok(vec![Value::Null; want]),
                    1 => Ok(rel.rows.into_iter().next().unwrap()),
                    _ => Err(EvalError::SubqueryReturnedMultipleRows),
                }
            }
            other => Ok(vec![self.expr(other, ctx)?]),
        }
    }

    /// `(a, b) = (x, y)` is `a = x AND b = y`; `<>` is the OR of `<>`.
    fn row_compare(&self, op: BinaryOp, lhs: &Expr, rhs: &Expr, ctx: Ctx<'_>) -> Res<Value> {
        let l = self.row_values(lhs, None, ctx)?;
        let r = self.row_values(rhs, Some(l.len()), ctx)?;
        if l.len() != r.len() {
            return Err(EvalError::RowArity { op: op.symbol().into() });
        }
        let combine = if op == BinaryOp::Eq { BinaryOp::And } else { BinaryOp::Or };
        let mut acc = Value::Bool(op == BinaryOp::Eq);
        for (a, b) in l.into_iter().zip(r) {
            let v = binary(op, a, b)?;
            acc = binary(combine, acc, v)?;
        }
        Ok(acc)
    }

    fn aggregate(&self, name: &str, args: &FunctionArgs, g: &Group<'_>) -> Res<Value> {
        let upper = name.to_ascii_uppercase();
        let arg = match args {
            FunctionArgs::Star if upper == "COUNT" => return Ok(Value::Int(g.rows.len() as i64)),
            FunctionArgs::Star => return Err(EvalError::UnknownFunction { name: format!("{upper}(*)") }),
            FunctionArgs::List(a) if a.len() == 1 => &a[0],
            FunctionArgs::List(a) => return Err(EvalError::WrongArgumentCount { name: upper, expected: 1, found: a.len() }),
        };
        let mut vals = Vec::new();
        for row in &g.rows {
            let env = Env { layout: g.layout, row, parent: g.parent };
            if arg.contains_aggregate() {
                return Err(EvalError::MisplacedAggregate { name: upper });
            }
            let v = self.expr(arg, Ctx::Row(&env))?;
            if !v.is_null() {
                vals.push(v);
            }
        }
        match upper.as_str() {
            "COUNT" => Ok(Value::Int(vals.len() as i64)),
            "SUM" => vals.into_iter().try_fold(Value::Null, |acc, v| match acc {
                Value::Null => match v {
                    Value::Int(_) | Value::Decimal(_) => Ok(v),
                    other => Err(mismatch("SUM", &other, &other)),
                },
                acc => binary(BinaryOp::Add, acc, v),
            }),
            "AVG" => {
                if vals.is_empty() {
                    return Ok(Value::Null);
                }
                let mut sum = 0.0;
                for v in &vals {
                    sum += v.as_f64().ok_or_else(|| mismatch("AVG", v, v))?;
                }
                Ok(Value::decimal(sum / vals.len() as f64))
            }
            "MIN" | "MAX" => {
                let mut best: Option<Value> = None;
                for v in vals {
                    best = Some(match best {
                        None => v,
                        Some(b) => {
                            let ord = v.sql_cmp(&b).ok_or_else(|| mismatch(&upper, &v, &b))?;
                            let better = if upper == "MIN" { ord == Ordering::Less } else { ord == Ordering::Greater };
                            if better {
                                v
                            } else {
                                b
                            }
                        }
                    });
                }
                Ok(best.unwrap_or(Value::Null))
            }
            _ => unreachable!("aggregate names are fixed"),
        }
    }
}

/// Output-column lookup for ORDER BY: a position literal or a bare name that
/// matches exactly one output column.
fn output_key(e: &Expr, columns: &[String], row: &[Value]) -> Res<Option<Value>> {
    match e {
        Expr::Literal { value: Literal::Integer(n) } => {
            if *n >= 1 && (*n as usize) <= columns.len() {
                Ok(Some(row[*n as usize - 1].clone()))
            } else {
                Err(EvalError::OrderPositionOutOfRange { position: *n, columns: columns.len() })
            }
        }
        Expr::Column(ColumnRef { qualifier: None, name }) => {
            let hits: Vec<usize> = columns.iter().enumerate().filter(|(_, c)| *c == name).map(|(i, _)| i).collect();
            match hits.as_slice() {
                [i] => Ok(Some(row[*i].clone())),
                [] => Ok(None),
                _ => Err(EvalError::AmbiguousColumn { name: name.clone() }),
            }
        }
        _ => Ok(None),
    }
}

/// Stable sort; ascending puts NULLs last, descending puts them first.
fn sort_rows(mut rows: Vec<(Row, Vec<Value>)>, order_by: &[OrderItem]) -> Vec<Row> {
    if !order_by.is_empty() {
        rows.sort_by(|(_, a), (_, b)| {
            for (i, o) in order_by.iter().enumerate() {
                let ord = a[i].total_cmp(&b[i]);
                let ord = if o.direction == SortDirection::Descending { ord.reverse() } else { ord };
                if ord.is_ne() {
                    return ord;
                }
            }
            Ordering::Equal
        });
    }
    rows.into_iter().map(|(r, _)| r).collect()
}

fn literal(l: &Literal) -> Value {
    match l {
        Literal::Integer(i) => Value::Int(*i),
        Literal::Decimal(d) => Value::decimal(d.parse().expect("the lexer only produces valid decimals")),
        Literal::String(s) => Value::Text(s.clone()),
        Literal::Boolean(b) => Value::Bool(*b),
        Literal::Null => Value::Null,
    }
}

fn finite(op: &str, v: f64) -> Res<Value> {
    if v.is_finite() {
        Ok(Value::decimal(v))
    } else {
        Err(EvalError::NumericOverflow { op: op.into() })
    }
}

fn binary(op: BinaryOp, l: Value, r: Value) -> Res<Value> {
    use BinaryOp::*;
    let sym = op.symbol();
    match op {
        And | Or => {
            let (a, b) = (truth(&l)?, truth(&r)?);
            Ok(match (op, a, b) {
                (And, Some(false), _) | (And, _, Some(false)) => Value::Bool(false),
                (And, Some(true), Some(true)) => Value::Bool(true),
                (Or, Some(true), _) | (Or, _, Some(true)) => Value::Bool(true),
                (Or, Some(false), Some(false)) => Value::Bool(false),
                _ => Value::Null,
            })
        }
        _ if l.is_null() || r.is_null() => Ok(Value::Null),
        Eq | NotEq | Lt | LtEq | Gt | GtEq => {
            let ord = l.sql_cmp(&r).ok_or_else(|| mismatch(sym, &l, &r))?;
            Ok(Value::Bool(match op {
                Eq => ord.is_eq(),
                NotEq => ord.is_ne(),
                Lt => ord.is_lt(),
                LtEq => ord.is_le(),
                Gt => ord.is_gt(),
                _ => ord.is_ge(),
            }))
        }
        Add | Sub | Mul | Div | Mod => match (&l, &r) {
            (Value::Int(a), Value::Int(b)) => {
                let (a, b) = (*a, *b);
                if matches!(op, Div | Mod) && b == 0 {
                    return Err(EvalError::DivisionByZero);
                }
                let v = match op {
                    Add => a.checked_add(b),
                    Sub => a.checked_sub(b),
                    Mul => a.checked_mul(b),
                    Div => a.checked_div(b),
                    _ => a.checked_rem(b),
                };
                v.map(Value::Int).ok_or(EvalError::NumericOverflow { op: sym.into() })
            }
            _ => match (l.as_f64(), r.as_f64()) {
                (Some(a), Some(b)) => {
                    if matches!(op, Div | Mod) && b == 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    finite(
                        sym,
                        match op {
                            Add => a + b,
                            Sub => a - b,
                            Mul => a * b,
                            Div => a / b,
                            _ => a % b,
                        },
                    )
                }
                _ => Err(mismatch(sym, &l, &r)),
            },
        },
        BitAnd | BitOr | BitXor | ShiftLeft | ShiftRight => match (&l, &r) {
            (Value::Int(a), Value::Int(b)) => Ok(Value::Int(match op {
                BitAnd => a & b,
                BitOr => a | b,
                BitXor => a ^ b,
                ShiftLeft => a.wrapping_shl((*b & 63) as u32),
                _ => a.wrapping_shr((*b & 63) as u32),
            })),
            _ => Err(mismatch(sym, &l, &r)),
        },
    }
}

fn scalar_function(name: &str, args: Vec<Value>) -> Res<Value> {
    let lower = name.to_ascii_lowercase();
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(EvalError::WrongArgumentCount { name: lower.clone(), expected: n, found: args.len() })
        }
    };
    match lower.as_str() {
        "coalesce" => Ok(args.into_iter().find(|v| !v.is_null()).unwrap_or(Value::Null)),
        "lower" | "upper" | "length" => {
            arity(1)?;
            match &args[0] {
                Value::Null => Ok(Value::Null),
                Value::Text(s) => Ok(match lower.as_str() {
                    "lower" => Value::Text(s.to_lowercase()),
                    "upper" => Value::Text(s.to_uppercase()),
                    _ => Value::Int(s.chars().count() as i64),
                }),
                v => Err(mismatch(&lower, v, v)),
            }
        }
        "abs" => {
            arity(1)?;
            match &args[0] {
                Value::Null => Ok(Value::Null),
                Value::Int(i) => i.checked_abs().map(Value::Int).ok_or(EvalError::NumericOverflow { op: "abs".into() }),
                Value::Decimal(d) => Ok(Value::decimal(d.abs())),
                v => Err(mismatch("abs", v, v)),
            }
        }
        _ => Err(EvalError::UnknownFunction { name: name.into() }),
    }
}
