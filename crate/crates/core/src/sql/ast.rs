//! The normalized query tree shared by the parser, generator, advisor and
//! evaluator. Parentheses are not represented; grouping is structural.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelectAst {
    #[serde(default)]
    pub distinct: bool,
    pub select_list: Vec<SelectItem>,
    pub from: Vec<TableRef>,
    #[serde(default, rename = "where", skip_serializing_if = "Option::is_none")]
    pub where_clause: Option<Expr>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub group_by: Vec<Expr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub having: Option<Expr>,
    /// Applies to the whole result, including any set-operation branches.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub order_by: Vec<OrderItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_op: Option<Box<SetOperation>>,
}

impl SelectAst {
    /// `SELECT <items> FROM <table>` with nothing else.
    pub fn simple(items: Vec<SelectItem>, table: &str) -> Self {
        SelectAst {
            distinct: false,
            select_list: items,
            from: vec![TableRef::table(table)],
            where_clause: None,
            group_by: Vec::new(),
            having: None,
            order_by: Vec::new(),
            set_op: None,
        }
    }

    /// The chain of query blocks joined by set operations, head first. The
    /// operator stored with each block joins it to the previous one.
    pub fn branches(&self) -> Vec<(Option<SetOpKind>, &SelectAst)> {
        let mut out = vec![(None, self)];
        let mut cur = self;
        while let Some(op) = &cur.set_op {
            out.push((Some(op.kind), &op.right));
            cur = &op.right;
        }
        out
    }

    pub fn has_star(&self) -> bool {
        self.select_list.iter().any(|i| matches!(i, SelectItem::Wildcard))
    }

    /// True when the select list, HAVING or ORDER BY contains an aggregate call
    /// at this query level (subqueries are not inspected).
    pub fn has_aggregate(&self) -> bool {
        self.select_list.iter().any(|i| match i {
            SelectItem::Expr { expr, .. } => expr.contains_aggregate(),
            SelectItem::Wildcard => false,
        }) || self.having.as_ref().is_some_and(Expr::contains_aggregate)
            || self.order_by.iter().any(|o| o.expr.contains_aggregate())
    }

    /// Whether the block aggregates rows into groups.
    pub fn is_grouped(&self) -> bool {
        !self.group_by.is_empty() || self.having.is_some() || self.has_aggregate()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "item")]
pub enum SelectItem {
    Wildcard,
    Expr {
        expr: Expr,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alias: Option<String>,
    },
}

impl SelectItem {
    pub fn expr(expr: Expr) -> Self {
        SelectItem::Expr { expr, alias: None }
    }

    pub fn column(name: &str) -> Self {
        SelectItem::expr(Expr::column(name))
    }

    /// The expression of a non-wildcard item.
    pub fn expr_ref(&self) -> Option<&Expr> {
        match self {
            SelectItem::Expr { expr, .. } => Some(expr),
            SelectItem::Wildcard => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableName {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub name: String,
}

impl TableName {
    pub fn bare(name: &str) -> Self {
        TableName { schema: None, name: name.to_string() }
    }

    /// Parses `name` or `schema.name`.
    pub fn parse_dotted(text: &str) -> Self {
        match text.split_once('.') {
            Some((schema, name)) => TableName { schema: Some(schema.to_string()), name: name.to_string() },
            None => TableName::bare(text),
        }
    }

    /// `schema.name` or `name`, unquoted; used as a lookup key.
    pub fn key(&self) -> String {
        match &self.schema {
            Some(s) => format!("{s}.{}", self.name),
            None => self.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "factor")]
pub enum TableFactor {
    Table {
        name: TableName,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alias: Option<String>,
    },
    Derived {
        subquery: Box<SelectAst>,
        alias: String,
    },
}

impl TableFactor {
    /// The name columns of this factor are qualified with.
    pub fn binding_name(&self) -> &str {
        match self {
            TableFactor::Table { name, alias } => alias.as_deref().unwrap_or(&name.name),
            TableFactor::Derived { alias, .. } => alias,
        }
    }
}

/// Inner join against `factor` with an `ON` condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Join {
    pub factor: TableFactor,
    pub on: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableRef {
    pub factor: TableFactor,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub joins: Vec<Join>,
}

impl TableRef {
    pub fn table(name: &str) -> Self {
        TableRef {
            factor: TableFactor::Table { name: TableName::parse_dotted(name), alias: None },
            joins: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SortDirection {
    #[default]
    Ascending,
    Descending,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderItem {
    pub expr: Expr,
    #[serde(default)]
    pub direction: SortDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetOpKind {
    Union,
    UnionAll,
}

impl SetOpKind {
    pub fn sql(self) -> &'static str {
        match self {
            SetOpKind::Union => "UNION",
            SetOpKind::UnionAll => "UNION ALL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SetOperation {
    pub kind: SetOpKind,
    pub right: SelectAst,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "value")]
pub enum Literal {
    Integer(i64),
    /// Kept as source text so ASTs stay comparable.
    Decimal(String),
    String(String),
    Boolean(bool),
    Null,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorCategory {
    Arithmetic,
    Comparison,
    Logical,
    Bitwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
    And,
    Or,
    BitAnd,
    BitOr,
    BitXor,
    ShiftLeft,
    ShiftRight,
}

/// Binding strength, loosest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Precedence {
    Or = 1,
    And,
    Not,
    Is,
    Comparison,
    Additive,
    Multiplicative,
    Unary,
    Atom,
}

impl BinaryOp {
    pub fn category(self) -> OperatorCategory {
        use BinaryOp::*;
        match self {
            Add | Sub | Mul | Div | Mod => OperatorCategory::Arithmetic,
            Eq | NotEq | Lt | LtEq | Gt | GtEq => OperatorCategory::Comparison,
            And | Or => OperatorCategory::Logical,
            BitAnd | BitOr | BitXor | ShiftLeft | ShiftRight => OperatorCategory::Bitwise,
        }
    }

    pub fn precedence(self) -> Precedence {
        use BinaryOp::*;
        match self {
            Or => Precedence::Or,
            And => Precedence::And,
            Eq | NotEq | Lt | LtEq | Gt | GtEq => Precedence::Comparison,
            Add | Sub | BitOr | BitXor => Precedence::Additive,
            Mul | Div | Mod | BitAnd | ShiftLeft | ShiftRight => Precedence::Multiplicative,
        }
    }

    pub fn symbol(self) -> &'static str {
        use BinaryOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Mod => "%",
            Eq => "=",
            NotEq => "<>",
            Lt => "<",
            LtEq => "<=",
            Gt => ">",
            GtEq => ">=",
            And => "AND",
            Or => "OR",
            BitAnd => "&",
            BitOr => "|",
            BitXor => "#",
            ShiftLeft => "<<",
            ShiftRight => ">>",
        }
    }

    pub fn from_symbol(sym: &str) -> Option<BinaryOp> {
        use BinaryOp::*;
        Some(match sym {
            "+" => Add,
            "-" => Sub,
            "*" => Mul,
            "/" => Div,
            "%" => Mod,
            "=" => Eq,
            "<>" | "!=" => NotEq,
            "<" => Lt,
            "<=" => LtEq,
            ">" => Gt,
            ">=" => GtEq,
            "&" => BitAnd,
            "|" => BitOr,
            "#" => BitXor,
            "<<" => ShiftLeft,
            ">>" => ShiftRight,
            _ => return None,
        })
    }

    pub const COMPARISONS: [BinaryOp; 6] =
        [BinaryOp::Eq, BinaryOp::NotEq, BinaryOp::Lt, BinaryOp::LtEq, BinaryOp::Gt, BinaryOp::GtEq];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnaryOp {
    Not,
    Neg,
    BitNot,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColumnRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualifier: Option<String>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "args", content = "list")]
pub enum FunctionArgs {
    /// `COUNT(*)`
    Star,
    List(Vec<Expr>),
}

pub const AGGREGATES: [&str; 5] = ["COUNT", "SUM", "AVG", "MIN", "MAX"];

pub fn is_aggregate_name(name: &str) -> bool {
    AGGREGATES.iter().any(|a| a.eq_ignore_ascii_case(name))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Expr {
    Column(ColumnRef),
    Literal { value: Literal },
    Function { name: String, args: FunctionArgs },
    Binary { op: BinaryOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Unary { op: UnaryOp, operand: Box<Expr> },
    IsNull { operand: Box<Expr>, negated: bool },
    Row { items: Vec<Expr> },
    Subquery { query: Box<SelectAst> },
}

impl Expr {
    pub fn column(name: &str) -> Expr {
        Expr::Column(ColumnRef { qualifier: None, name: name.to_string() })
    }

    pub fn qualified(qualifier: &str, name: &str) -> Expr {
        Expr::Column(ColumnRef { qualifier: Some(qualifier.to_string()), name: name.to_string() })
    }

    pub fn int(v: i64) -> Expr {
        Expr::Literal { value: Literal::Integer(v) }
    }

    pub fn string(v: &str) -> Expr {
        Expr::Literal { value: Literal::String(v.to_string()) }
    }

    pub fn call(name: &str, args: Vec<Expr>) -> Expr {
        Expr::Function { name: name.to_string(), args: FunctionArgs::List(args) }
    }

    pub fn count_star() -> Expr {
        Expr::Function { name: "COUNT".into(), args: FunctionArgs::Star }
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn and(lhs: Expr, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::And, lhs, rhs)
    }

    pub fn subquery(q: SelectAst) -> Expr {
        Expr::Subquery { query: Box::new(q) }
    }

    pub fn precedence(&self) -> Precedence {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Unary { op: UnaryOp::Not, .. } => Precedence::Not,
            Expr::Unary { .. } => Precedence::Unary,
            Expr::IsNull { .. } => Precedence::Is,
            _ => Precedence::Atom,
        }
    }

    pub fn is_aggregate_call(&self) -> bool {
        matches!(self, Expr::Function { name, .. } if is_aggregate_name(name))
    }

    /// Aggregate anywhere in this expression, not looking into subqueries.
    pub fn contains_aggregate(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= e.is_aggregate_call());
        found
    }

    pub fn contains_subquery(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Subquery { .. }));
        found
    }

    /// Pre-order traversal of this expression, stopping at subquery boundaries.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Function { args: FunctionArgs::List(args), .. } => args.iter().for_each(|a| a.walk(f)),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::Unary { operand, .. } | Expr::IsNull { operand, .. } => operand.walk(f),
            Expr::Row { items } => items.iter().for_each(|a| a.walk(f)),
            _ => {}
        }
    }

    /// Column references at this query level.
    pub fn columns(&self) -> Vec<&ColumnRef> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Column(c) = e {
                out.push(c);
            }
        });
        out
    }

    /// Splits a left- or right-nested AND chain into its conjuncts.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        match self {
            Expr::Binary { op: BinaryOp::And, lhs, rhs } => {
                let mut v = lhs.conjuncts();
                v.extend(rhs.conjuncts());
                v
            }
            other => vec![other],
        }
    }

    /// Left-associated AND of the given conjuncts; `None` when empty.
    pub fn conjoin(parts: impl IntoIterator<Item = Expr>) -> Option<Expr> {
        parts.into_iter().reduce(Expr::and)
    }
}
