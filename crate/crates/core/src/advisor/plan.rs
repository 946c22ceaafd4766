//! A teaching cost model: every ordering of the WHERE conjuncts becomes a
//! chain of filters over a sequential scan, and each chain is costed.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::catalog::SchemaCatalog;
use crate::sql::{render_expr, BinaryOp, Expr, SelectAst, SelectItem, TableFactor, TableName};

/// Upper bound on conjuncts; 6! orderings is the most enumerated.
pub const MAX_CONJUNCTS: usize = 6;

/// Constants of the toy cost model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// Per-row cost of a predicate that calls a non-aggregate function.
    pub function_weight: f64,
    /// Per-row cost of any other predicate.
    pub comparison_weight: f64,
    pub equality_selectivity: f64,
    /// For `<`, `<=`, `>` and `>=`.
    pub inequality_selectivity: f64,
    /// For `<>`; the complement of equality.
    pub not_equal_selectivity: f64,
    /// For predicates of any other shape.
    pub other_selectivity: f64,
    /// Row count assumed for a table without statistics.
    pub default_rows: f64,
    pub planning_ms_per_plan: f64,
    pub execution_ms_per_cost: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            function_weight: 10.0,
            comparison_weight: 1.0,
            equality_selectivity: 0.1,
            inequality_selectivity: 0.33,
            not_equal_selectivity: 0.9,
            other_selectivity: 0.5,
            default_rows: 1000.0,
            planning_ms_per_plan: 0.01,
            execution_ms_per_cost: 0.001,
        }
    }
}

impl CostModel {
    pub fn weight(&self, predicate: &Expr) -> f64 {
        let mut calls = false;
        predicate.walk(&mut |e| calls |= matches!(e, Expr::Function { .. }) && !e.is_aggregate_call());
        if calls {
            self.function_weight
        } else {
            self.comparison_weight
        }
    }

    pub fn default_selectivity(&self, predicate: &Expr) -> f64 {
        match predicate {
            Expr::Binary { op: BinaryOp::Eq, .. } => self.equality_selectivity,
            Expr::Binary { op: BinaryOp::NotEq, .. } => self.not_equal_selectivity,
            Expr::Binary { op: BinaryOp::Lt | BinaryOp::LtEq | BinaryOp::Gt | BinaryOp::GtEq, .. } => self.inequality_selectivity,
            _ => self.other_selectivity,
        }
    }
}

/// Row count of one table, with optional selectivity overrides keyed by the
/// canonical text of a predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableStats {
    pub table: String,
    pub row_count: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub selectivities: BTreeMap<String, f64>,
}

impl TableStats {
    pub fn new(table: &str, row_count: u64) -> Self {
        TableStats { table: table.to_string(), row_count, selectivities: BTreeMap::new() }
    }

    pub fn with_selectivity(mut self, predicate: &str, s: f64) -> Self {
        self.selectivities.insert(predicate.to_string(), s);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "operator")]
pub enum PlanOperator {
    SeqScan { table: String },
    Filter { predicate: String },
    Project { columns: Vec<String> },
    NestedLoopJoin { condition: String },
}

impl PlanOperator {
    pub fn describe(&self) -> String {
        match self {
            PlanOperator::SeqScan { table } => format!("Seq Scan on {table}"),
            PlanOperator::Filter { predicate } => format!("Filter {predicate}"),
            PlanOperator::Project { columns } => format!("Project {}", columns.join(", ")),
            PlanOperator::NestedLoopJoin { condition } => format!("Nested Loop Join on {condition}"),
        }
    }
}

/// One operator with its own cost and estimated output rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanNode {
    #[serde(flatten)]
    pub operator: PlanOperator,
    pub cost: f64,
    pub rows: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<PlanNode>,
}

impl PlanNode {
    /// Sum of the costs of this node and everything below it.
    pub fn total_cost(&self) -> f64 {
        self.cost + self.children.iter().map(PlanNode::total_cost).sum::<f64>()
    }

    fn lines(&self, depth: usize, out: &mut Vec<String>) {
        out.push(format!("{}{}  (cost {}, rows {})", "  ".repeat(depth), self.operator.describe(), num(self.cost), num(self.rows)));
        for c in &self.children {
            c.lines(depth + 1, out);
        }
    }

    pub fn render(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.lines(0, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    pub plan: PlanNode,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub estimated_cost: f64,
    pub estimated_planning_time_ms: f64,
    pub estimated_execution_time_ms: f64,
    pub plan: PlanNode,
    /// Every other enumerated plan, cheapest first.
    pub alternatives: Vec<Alternative>,
    pub enumerated_plans: usize,
    /// States that all figures come from the teaching cost model.
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Verbatim EXPLAIN ANALYZE text from a live server, when configured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub server_explain: Option<String>,
}

pub const ESTIMATE_LABEL: &str = "estimates from a teaching cost model, not measurements";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum PlanError {
    #[error("plans can only be estimated for simpler queries: {construct} is not supported")]
    UnsupportedShape { construct: String },
}

fn unsupported(construct: &str) -> PlanError {
    PlanError::UnsupportedShape { construct: construct.to_string() }
}

fn num(x: f64) -> String {
    if (x - x.round()).abs() < 1e-9 {
        format!("{}", x.round() as i64)
    } else {
        let s = format!("{x:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

struct Context<'a> {
    model: &'a CostModel,
    stats: &'a [TableStats],
    notes: Vec<String>,
}

impl Context<'_> {
    fn rows(&mut self, name: &TableName, catalog: &SchemaCatalog) -> f64 {
        let qualified = catalog.resolve_table(&name.key()).map(|t| t.qualified_name());
        let found = self.stats.iter().find(|s| s.table == name.key() || s.table == name.name || Some(&s.table) == qualified.as_ref());
        match found {
            Some(s) => s.row_count as f64,
            None => {
                self.notes.push(format!("no statistics for {}; assumed {} rows", name.key(), num(self.model.default_rows)));
                self.model.default_rows
            }
        }
    }

    fn selectivity(&self, predicate: &Expr) -> f64 {
        let text = render_expr(predicate);
        self.stats
            .iter()
            .find_map(|s| s.selectivities.get(&text).copied())
            .map(|s| s.clamp(0.0, 1.0))
            .unwrap_or_else(|| self.model.default_selectivity(predicate))
    }
}

/// Plans `ast` with the default cost model.
pub fn plan(ast: &SelectAst, catalog: &SchemaCatalog, stats: &[TableStats]) -> Result<PlanReport, PlanError> {
    plan_with(ast, catalog, stats, &CostModel::default())
}

pub fn plan_with(ast: &SelectAst, catalog: &SchemaCatalog, stats: &[TableStats], model: &CostModel) -> Result<PlanReport, PlanError> {
    if ast.set_op.is_some() {
        return Err(unsupported("UNION"));
    }
    if ast.is_grouped() {
        return Err(unsupported("grouping or aggregates"));
    }
    let [tr] = ast.from.as_slice() else { return Err(unsupported("more than one FROM table")) };
    if tr.joins.len() > 1 {
        return Err(unsupported("more than one join"));
    }
    let subquery = ast.where_clause.as_ref().is_some_and(Expr::contains_subquery)
        || ast.select_list.iter().any(|i| i.expr_ref().is_some_and(Expr::contains_subquery));
    if subquery {
        return Err(unsupported("a subquery"));
    }
    let scan_name = |f: &TableFactor| match f {
        TableFactor::Table { name, .. } => Ok(name.clone()),
        TableFactor::Derived { .. } => Err(unsupported("a subquery in FROM")),
    };
    let mut ctx = Context { model, stats, notes: Vec::new() };
    let left = scan_name(&tr.factor)?;
    let left_rows = ctx.rows(&left, catalog);
    let scan = |name: &TableName, rows: f64| PlanNode { operator: PlanOperator::SeqScan { table: name.key() }, cost: rows, rows, children: Vec::new() };
    let mut base = scan(&left, left_rows);
    if let Some(j) = tr.joins.first() {
        let right = scan_name(&j.factor)?;
        let right_rows = ctx.rows(&right, catalog);
        let pairs = left_rows * right_rows;
        base = PlanNode {
            operator: PlanOperator::NestedLoopJoin { condition: render_expr(&j.on) },
            cost: pairs * model.weight(&j.on),
            rows: pairs * ctx.selectivity(&j.on),
            children: vec![base, scan(&right, right_rows)],
        };
    }
    let conjuncts: Vec<&Expr> = ast.where_clause.as_ref().map(|w| w.conjuncts()).unwrap_or_default();
    if conjuncts.len() > MAX_CONJUNCTS {
        return Err(unsupported(&format!("a WHERE clause with more than {MAX_CONJUNCTS} conditions")));
    }
    let columns: Vec<String> = ast
        .select_list
        .iter()
        .map(|i| match i {
            SelectItem::Wildcard => "*".to_string(),
            SelectItem::Expr { expr, alias: Some(a) } => format!("{} AS {a}", render_expr(expr)),
            SelectItem::Expr { expr, alias: None } => render_expr(expr),
        })
        .collect();
    let mut plans: Vec<PlanNode> = (0..conjuncts.len())
        .permutations(conjuncts.len())
        .map(|order| {
            let mut node = base.clone();
            for i in order {
                let p = conjuncts[i];
                let n = node.rows;
                node = PlanNode {
                    operator: PlanOperator::Filter { predicate: render_expr(p) },
                    cost: n * model.weight(p),
                    rows: n * ctx.selectivity(p),
                    children: vec![node],
                };
            }
            PlanNode { operator: PlanOperator::Project { columns: columns.clone() }, cost: 0.0, rows: node.rows, children: vec![node] }
        })
        .collect();
    let enumerated = plans.len();
    // Stable: among equal costs the first enumerated ordering wins.
    plans.sort_by(|a, b| a.total_cost().total_cmp(&b.total_cost()));
    let mut it = plans.into_iter();
    let primary = it.next().expect("at least one ordering");
    let alternatives = it.map(|p| Alternative { cost: p.total_cost(), plan: p }).collect();
    let cost = primary.total_cost();
    if !ast.order_by.is_empty() || ast.distinct {
        ctx.notes.push("sorting and DISTINCT are not part of the estimate".to_string());
    }
    ctx.notes.dedup();
    Ok(PlanReport {
        estimated_cost: cost,
        estimated_planning_time_ms: model.planning_ms_per_plan * enumerated as f64,
        estimated_execution_time_ms: cost * model.execution_ms_per_cost,
        plan: primary,
        alternatives,
        enumerated_plans: enumerated,
        label: ESTIMATE_LABEL.to_string(),
        notes: ctx.notes,
        server_explain: None,
    })
}

fn side_by_side(left: &[String], right: &[String]) -> Vec<String> {
    let width = left.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    (0..left.len().max(right.len()))
        .map(|i| {
            let l = left.get(i).map(String::as_str).unwrap_or("");
            let r = right.get(i).map(String::as_str).unwrap_or("");
            format!("{l:<width$}  |  {r}").trim_end().to_string()
        })
        .collect()
}

/// Plan report as text, with the cheapest plan beside each alternative.
pub fn compare_plans(ast: &SelectAst, catalog: &SchemaCatalog, stats: &[TableStats]) -> Result<String, PlanError> {
    let report = plan(ast, catalog, stats)?;
    let mut out = vec![
        format!("Enumerated plans: {} ({})", report.enumerated_plans, report.label),
        format!(
            "Cheapest plan: estimated cost {}, estimated planning time {} ms, estimated execution time {} ms",
            num(report.estimated_cost),
            num(report.estimated_planning_time_ms),
            num(report.estimated_execution_time_ms)
        ),
    ];
    for n in &report.notes {
        out.push(format!("Note: {n}"));
    }
    out.push(String::new());
    let mut primary = vec![format!("Plan 1 (cheapest), cost {}", num(report.estimated_cost))];
    primary.extend(report.plan.render());
    if report.alternatives.is_empty() {
        out.extend(primary.iter().cloned());
        out.push(String::new());
        out.push("No alternative plans: there is nothing to reorder.".to_string());
    }
    for (k, alt) in report.alternatives.iter().enumerate() {
        let ratio = if report.estimated_cost > 0.0 { alt.cost / report.estimated_cost } else { 1.0 };
        let mut right = vec![format!("Plan {}, cost {} ({}x the cheapest)", k + 2, num(alt.cost), num(ratio))];
        right.extend(alt.plan.render());
        if k > 0 {
            out.push(String::new());
        }
        out.extend(side_by_side(&primary, &right));
    }
    Ok(out.join("\n") + "\n")
}
