//! Completeness checks and lowering of a graph to a [`SelectAst`].

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use super::properties::*;
use super::{CanvasElement, ElementId, ElementKind, GraphContext, PropertyValue, QueryGraph};
use crate::catalog::SchemaCatalog;
use crate::sql::*;

/// A reason the graph is not a complete query yet, with the next step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDiagnostic {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<ElementId>,
    pub code: String,
    pub problem: String,
    pub hint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "error")]
pub enum LowerError {
    #[error("The query graph is not complete yet: {}", diagnostics.first().map(|d| d.problem.as_str()).unwrap_or(""))]
    IncompleteGraph { diagnostics: Vec<GraphDiagnostic> },
}

struct Lowering<'a, 'c> {
    g: &'a QueryGraph,
    ctx: &'a GraphContext<'c>,
    stack: Vec<String>,
    diags: Vec<GraphDiagnostic>,
}

fn diag(element: Option<ElementId>, code: &str, problem: String, hint: &str) -> GraphDiagnostic {
    GraphDiagnostic { element, code: code.into(), problem, hint: hint.into() }
}

/// `t.c` or `c` as a column reference.
fn column_expr(choice: &str) -> Expr {
    match choice.split_once('.') {
        Some((q, c)) => Expr::qualified(q, c),
        None => Expr::column(choice),
    }
}

/// A literal from a value typed into the properties panel. Anything that is
/// not a literal is taken as text.
pub(crate) fn value_expr(text: &str) -> Expr {
    match parse_expression(text.trim()).map(|e| normalize::normalize_expr(&e)) {
        Ok(e @ Expr::Literal { .. }) => e,
        _ => Expr::string(text.trim()),
    }
}

fn text<'a>(el: &'a CanvasElement, key: &str) -> Option<&'a str> {
    el.properties.get(key).and_then(PropertyValue::as_text)
}

fn list<'a>(el: &'a CanvasElement, key: &str) -> &'a [String] {
    el.properties.get(key).and_then(PropertyValue::as_list).unwrap_or(&[])
}

impl<'a, 'c> Lowering<'a, 'c> {
    fn push(&mut self, d: GraphDiagnostic) {
        self.diags.push(d);
    }

    fn check_properties(&mut self, el: &CanvasElement) {
        let Ok(schema) = property_schema_in(self.g, el.id, self.ctx) else { return };
        for (key, value) in &el.properties {
            if schema.admit(key, value).is_err() {
                self.push(diag(
                    Some(el.id),
                    "stale_property",
                    format!("The {} setting {value} on {} element {} no longer fits its connections.", key, el.kind, el.id),
                    "Open the properties panel and choose the value again.",
                ));
            }
        }
        for e in schema.entries.iter().filter(|e| e.required) {
            let missing = match el.properties.get(&e.key) {
                None => true,
                Some(PropertyValue::List(v)) => v.is_empty(),
                Some(_) => false,
            };
            let covered_by_subquery = el.kind == ElementKind::Where && e.key == "value" && el.properties.contains_key("subquery");
            if missing && !covered_by_subquery {
                self.push(diag(Some(el.id), "missing_property", format!("{} element {} needs a “{}” setting.", el.kind, el.id, e.key), &e.help));
            }
        }
    }

    fn run(&mut self) -> Option<SelectAst> {
        let g = self.g;
        let catalog = self.ctx.catalog;
        let select = g.select_id();
        if select.is_none() {
            self.push(diag(None, "missing_select", "The canvas has no SELECT element.".into(), "Drag a SELECT element from the toolbox; every query ends in one."));
        }
        for el in g.elements.values() {
            let on_path = el.kind == ElementKind::Select || select.is_some_and(|s| select_for(g, el.id) == Some(s));
            if !on_path {
                let (code, problem, hint) = if el.kind == ElementKind::Having {
                    ("having_requires_group_by", "HAVING requires GROUP BY.".to_string(), "Connect this HAVING element to a GROUP BY element, and connect the GROUP BY element to SELECT.")
                } else if el.kind == ElementKind::Table && g.output(el.id).is_some_and(|o| o.kind == ElementKind::Join) {
                    ("not_connected", format!("The JOIN that TABLE element {} feeds is not connected to SELECT.", el.id), "Connect the JOIN element to the SELECT element.")
                } else {
                    ("not_connected", format!("{} element {} is not connected to the SELECT element.", el.kind, el.id), "Drag a connection from this element towards SELECT.")
                };
                self.push(diag(Some(el.id), code, problem, hint));
                continue;
            }
            self.check_properties(el);
            match el.kind {
                ElementKind::Join => {
                    let inputs = join_inputs(g, el.id);
                    if inputs.len() != 2 {
                        self.push(diag(Some(el.id), "join_incomplete", format!("JOIN element {} needs two tables but has {}.", el.id, inputs.len()), "Connect two TABLE elements to the JOIN; the first one connected is the left side."));
                    }
                }
                ElementKind::Where if el.properties.contains_key("subquery") && el.properties.contains_key("value") => {
                    self.push(diag(Some(el.id), "value_and_subquery", format!("WHERE element {} has both a value and a subquery.", el.id), "Keep one of them: clear the value or the subquery."));
                }
                ElementKind::Having if text(el, "column") == Some("*") && text(el, "aggregate").is_some_and(|a| a != "COUNT") => {
                    self.push(diag(Some(el.id), "illegal_aggregate", format!("HAVING element {} applies {} to *.", el.id, text(el, "aggregate").unwrap_or("")), "Only COUNT works with *; choose a column for the other summaries."));
                }
                _ => {}
            }
        }
        let s = select?;
        let sel = &g.elements[&s];
        let tables = source_table_elements(g, s);
        if tables.is_empty() {
            self.push(diag(Some(s), "no_source_table", "No source table is connected to the SELECT element.".into(), "Drag a TABLE element, choose its table and connect it to SELECT."));
        }
        let mut names = HashSet::new();
        for t in &tables {
            if let Some(def) = table_of(g, *t, catalog) {
                if !names.insert(def.name.clone()) {
                    self.push(diag(Some(*t), "duplicate_source", format!("The table {} is used twice in this query.", def.name), "Each table can feed the SELECT element once."));
                }
            }
        }
        let columns = list(sel, "columns");
        let aggregates = list(sel, "aggregates");
        if columns.is_empty() && aggregates.is_empty() {
            self.push(diag(Some(s), "no_output_columns", "The SELECT element has no columns to show.".into(), "Choose columns (or *) or an aggregate in the SELECT properties."));
        }
        let group = g.inputs(s).into_iter().find(|e| e.kind == ElementKind::GroupBy);
        let grouped_cols: Vec<String> = group.map(|e| list(e, "columns").to_vec()).unwrap_or_default();
        if group.is_some() || !aggregates.is_empty() {
            for c in columns {
                if c == "*" || !grouped_cols.contains(c) {
                    self.push(diag(Some(s), "ungrouped_column", format!("The column {c} is shown but the query groups rows."), "Add it to the GROUP BY columns or remove it from the SELECT columns."));
                }
            }
            for o in g.inputs(s).into_iter().filter(|e| e.kind == ElementKind::OrderBy) {
                if let Some(c) = text(o, "column") {
                    if !grouped_cols.iter().any(|x| x == c) {
                        self.push(diag(Some(o.id), "ungrouped_sort", format!("ORDER BY element {} sorts by {c}, which is not a grouping column.", o.id), "Sort by one of the GROUP BY columns instead."));
                    }
                }
            }
        }
        let mut where_parts = Vec::new();
        for w in g.inputs(s).into_iter().filter(|e| e.kind == ElementKind::Where) {
            let rhs = match text(w, "subquery") {
                Some(name) => self.subquery(w.id, name),
                None => text(w, "value").map(value_expr),
            };
            if let (Some(c), Some(op), Some(rhs)) = (text(w, "column"), text(w, "operator").and_then(comparison_op), rhs) {
                where_parts.push(Expr::binary(op, column_expr(c), rhs));
            }
        }

        if !self.diags.is_empty() {
            return None;
        }

        let mut select_list: Vec<SelectItem> = columns.iter().map(|c| if c == "*" { SelectItem::Wildcard } else { SelectItem::expr(column_expr(c)) }).collect();
        select_list.extend(aggregates.iter().map(|a| SelectItem::expr(parse_expression(a).expect("aggregate choices are generated SQL"))));
        let from = g
            .inputs(s)
            .into_iter()
            .filter_map(|e| match e.kind {
                ElementKind::Table => Some(TableRef::table(text(e, "table_name")?)),
                ElementKind::Join => {
                    let ins = join_inputs(g, e.id);
                    let lt = text(&g.elements[&ins[0]], "table_name")?;
                    let rt = text(&g.elements[&ins[1]], "table_name")?;
                    let (lf, rf) = (TableRef::table(lt).factor, TableRef::table(rt).factor);
                    let on = Expr::binary(
                        BinaryOp::Eq,
                        Expr::qualified(lf.binding_name(), text(e, "left_column")?),
                        Expr::qualified(rf.binding_name(), text(e, "right_column")?),
                    );
                    Some(TableRef { factor: lf, joins: vec![Join { factor: rf, on }] })
                }
                _ => None,
            })
            .collect();
        let having = group.and_then(|gb| {
            let parts = g.inputs(gb.id).into_iter().filter(|e| e.kind == ElementKind::Having).filter_map(|h| {
                let agg = text(h, "aggregate")?;
                let args = match text(h, "column")? {
                    "*" => FunctionArgs::Star,
                    c => FunctionArgs::List(vec![column_expr(c)]),
                };
                let op = comparison_op(text(h, "operator")?)?;
                Some(Expr::binary(op, Expr::Function { name: agg.to_string(), args }, value_expr(text(h, "value")?)))
            });
            Expr::conjoin(parts.collect::<Vec<_>>())
        });
        let order_by = g
            .inputs(s)
            .into_iter()
            .filter(|e| e.kind == ElementKind::OrderBy)
            .filter_map(|o| {
                Some(OrderItem {
                    expr: column_expr(text(o, "column")?),
                    direction: if text(o, "direction") == Some("DESC") { SortDirection::Descending } else { SortDirection::Ascending },
                })
            })
            .collect();
        let ast = SelectAst {
            distinct: sel.properties.get("distinct").and_then(PropertyValue::as_bool).unwrap_or(false),
            select_list,
            from,
            where_clause: Expr::conjoin(where_parts),
            group_by: grouped_cols.iter().map(|c| column_expr(c)).collect(),
            having,
            order_by,
            set_op: None,
        };
        match validate_ast(&ast) {
            Ok(()) => Some(ast),
            Err(e) => {
                self.push(diag(Some(s), "invalid_query", e.to_string(), "Review the element settings."));
                None
            }
        }
    }

    fn subquery(&mut self, at: ElementId, name: &str) -> Option<Expr> {
        let Some(sub) = self.ctx.siblings.and_then(|s| s.get(name)) else {
            self.push(diag(Some(at), "unknown_subquery", format!("WHERE element {at} uses the query graph “{name}”, which does not exist."), "Choose another subquery graph."));
            return None;
        };
        if self.stack.iter().any(|n| n == name) {
            self.push(diag(Some(at), "subquery_cycle", format!("The subquery “{name}” refers back to a query that uses it."), "Pick a subquery graph that does not point back here."));
            return None;
        }
        let ctx = GraphContext { current: Some(name), ..*self.ctx };
        let mut inner = Lowering { g: sub, ctx: &ctx, stack: self.stack.clone(), diags: Vec::new() };
        inner.stack.push(name.to_string());
        let ast = inner.run();
        match ast {
            Some(ast) if ast.select_list.len() == 1 && !ast.has_star() => Some(Expr::subquery(ast)),
            Some(_) => {
                self.push(diag(Some(at), "subquery_columns", format!("The subquery “{name}” must return exactly one column."), "Choose a single column or aggregate in that graph's SELECT element."));
                None
            }
            None => {
                self.push(diag(Some(at), "subquery_incomplete", format!("The subquery “{name}” is not complete yet."), "Open that graph and fix its problems first."));
                None
            }
        }
    }
}

fn lower(g: &QueryGraph, ctx: &GraphContext<'_>) -> (Vec<GraphDiagnostic>, Option<SelectAst>) {
    let mut l = Lowering { g, ctx, stack: ctx.current.map(|c| vec![c.to_string()]).unwrap_or_default(), diags: Vec::new() };
    let ast = l.run();
    let mut diags = l.diags;
    diags.sort_by_key(|d| d.element.map_or(0, |e| e as u64 + 1));
    (diags, ast)
}

/// Empty exactly when the graph lowers to a complete query.
pub fn validate_graph(g: &QueryGraph, catalog: &SchemaCatalog) -> Vec<GraphDiagnostic> {
    validate_graph_in(g, &GraphContext::new(catalog))
}

pub fn validate_graph_in(g: &QueryGraph, ctx: &GraphContext<'_>) -> Vec<GraphDiagnostic> {
    lower(g, ctx).0
}

pub fn graph_to_ast(g: &QueryGraph, catalog: &SchemaCatalog) -> Result<SelectAst, LowerError> {
    graph_to_ast_in(g, &GraphContext::new(catalog))
}

/// TABLE and JOIN inputs of SELECT become FROM in connection order; WHERE
/// inputs are AND-combined in connection order.
pub fn graph_to_ast_in(g: &QueryGraph, ctx: &GraphContext<'_>) -> Result<SelectAst, LowerError> {
    match lower(g, ctx) {
        (d, Some(ast)) if d.is_empty() => Ok(ast),
        (diagnostics, _) => Err(LowerError::IncompleteGraph { diagnostics }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ColumnDef, TableDef};
    use std::collections::BTreeMap;
    use ElementKind::*;

    fn catalog() -> SchemaCatalog {
        let mut c = SchemaCatalog::new();
        c.add_table(TableDef::new("public", "customers", vec![ColumnDef::new("id", "integer"), ColumnDef::new("name", "text"), ColumnDef::new("age", "integer")])).unwrap();
        c.add_table(TableDef::new("public", "orders", vec![ColumnDef::new("id", "integer"), ColumnDef::new("customer_id", "integer"), ColumnDef::new("total", "numeric")])).unwrap();
        c
    }

    fn t(s: &str) -> PropertyValue {
        PropertyValue::Text(s.into())
    }

    fn l(items: &[&str]) -> PropertyValue {
        PropertyValue::List(items.iter().map(|s| s.to_string()).collect())
    }

    fn base(cat: &SchemaCatalog) -> (QueryGraph, ElementId) {
        let mut g = QueryGraph::new();
        let s = g.drop_element(Select, 400, 200).unwrap();
        let tb = g.drop_element(Table, 10, 10).unwrap();
        g.set_property(tb, "table_name", t("customers"), cat).unwrap();
        g.connect(tb, s).unwrap();
        (g, s)
    }

    fn sql(ast: &SelectAst) -> String {
        render_select(ast).unwrap().text
    }

    #[test]
    fn minimal_lowering() {
        let cat = catalog();
        let (mut g, s) = base(&cat);
        g.set_property(s, "columns", l(&["name"]), &cat).unwrap();
        assert!(validate_graph(&g, &cat).is_empty());
        assert_eq!(graph_to_ast(&g, &cat).unwrap(), parse_select("SELECT name FROM customers").unwrap());
    }

    #[test]
    fn where_lowering() {
        let cat = catalog();
        let (mut g, s) = base(&cat);
        g.set_property(s, "columns", l(&["name"]), &cat).unwrap();
        let w = g.drop_element(Where, 0, 0).unwrap();
        g.connect(w, s).unwrap();
        g.set_property(w, "column", t("age"), &cat).unwrap();
        g.set_property(w, "operator", t(">"), &cat).unwrap();
        g.set_property(w, "value", t("30"), &cat).unwrap();
        let ast = graph_to_ast(&g, &cat).unwrap();
        assert_eq!(sql(&ast), "SELECT name FROM customers WHERE age > 30;");
        assert_eq!(normalize(&parse_select(&sql(&ast)).unwrap()), normalize(&ast));
    }

    #[test]
    fn lone_having_and_missing_table() {
        let cat = catalog();
        let mut g = QueryGraph::new();
        let s = g.drop_element(Select, 0, 0).unwrap();
        let h = g.drop_element(Having, 0, 0).unwrap();
        let d = validate_graph(&g, &cat);
        assert!(d.iter().any(|d| d.element == Some(h) && d.problem.contains("HAVING requires GROUP BY")));
        assert!(d.iter().any(|d| d.element == Some(s) && d.problem.contains("No source table")));
        assert!(matches!(graph_to_ast(&g, &cat), Err(LowerError::IncompleteGraph { .. })));
    }

    #[test]
    fn join_group_having_order() {
        let cat = catalog();
        let mut g = QueryGraph::new();
        let s = g.drop_element(Select, 0, 0).unwrap();
        let c = g.drop_element(Table, 0, 0).unwrap();
        let o = g.drop_element(Table, 0, 0).unwrap();
        let j = g.drop_element(Join, 0, 0).unwrap();
        g.set_property(c, "table_name", t("customers"), &cat).unwrap();
        g.set_property(o, "table_name", t("orders"), &cat).unwrap();
        g.connect(c, j).unwrap();
        g.connect(o, j).unwrap();
        g.connect(j, s).unwrap();
        g.set_property(j, "left_column", t("id"), &cat).unwrap();
        g.set_property(j, "right_column", t("customer_id"), &cat).unwrap();
        let gb = g.drop_element(GroupBy, 0, 0).unwrap();
        g.connect(gb, s).unwrap();
        g.set_property(gb, "columns", l(&["customers.name"]), &cat).unwrap();
        let h = g.drop_element(Having, 0, 0).unwrap();
        g.connect(h, gb).unwrap();
        for (k, v) in [("aggregate", "SUM"), ("column", "orders.total"), ("operator", ">="), ("value", "100")] {
            g.set_property(h, k, t(v), &cat).unwrap();
        }
        g.set_property(s, "columns", l(&["customers.name"]), &cat).unwrap();
        g.set_property(s, "aggregates", l(&["COUNT(*)"]), &cat).unwrap();
        let ob = g.drop_element(OrderBy, 0, 0).unwrap();
        g.connect(ob, s).unwrap();
        g.set_property(ob, "column", t("customers.name"), &cat).unwrap();
        g.set_property(ob, "direction", t("DESC"), &cat).unwrap();
        let ast = graph_to_ast(&g, &cat).unwrap();
        assert_eq!(
            sql(&ast),
            "SELECT customers.name, COUNT(*) FROM customers JOIN orders ON customers.id = orders.customer_id GROUP BY customers.name HAVING SUM(orders.total) >= 100 ORDER BY customers.name DESC;"
        );
    }

    #[test]
    fn stale_property_after_disconnect() {
        let cat = catalog();
        let (mut g, s) = base(&cat);
        g.set_property(s, "columns", l(&["name"]), &cat).unwrap();
        let tb = g.inputs(s)[0].id;
        g.disconnect(tb, s).unwrap();
        let d = validate_graph(&g, &cat);
        assert!(d.iter().any(|d| d.code == "stale_property"));
    }

    #[test]
    fn subquery_from_sibling_graph() {
        let cat = catalog();
        let mut graphs = BTreeMap::new();
        let (mut inner, s) = base(&cat);
        inner.set_property(s, "aggregates", l(&["MAX(age)"]), &cat).unwrap();
        graphs.insert("oldest".to_string(), inner);
        let (mut outer, s) = base(&cat);
        graphs.insert("main".to_string(), outer.clone());
        let ctx = GraphContext::with_siblings(&cat, &graphs, "main");
        outer.set_property_in(s, "columns", l(&["name"]), &ctx).unwrap();
        let w = outer.drop_element(Where, 0, 0).unwrap();
        outer.connect(w, s).unwrap();
        outer.set_property_in(w, "column", t("age"), &ctx).unwrap();
        outer.set_property_in(w, "operator", t("="), &ctx).unwrap();
        outer.set_property_in(w, "subquery", t("oldest"), &ctx).unwrap();
        let ast = graph_to_ast_in(&outer, &ctx).unwrap();
        assert_eq!(sql(&ast), "SELECT name FROM customers WHERE age = (SELECT MAX(age) FROM customers);");
    }

    #[test]
    fn value_parsing() {
        assert_eq!(value_expr("30"), Expr::int(30));
        assert_eq!(value_expr("-2.5"), Expr::Literal { value: Literal::Decimal("-2.5".into()) });
        assert_eq!(value_expr("'College'"), Expr::string("College"));
        assert_eq!(value_expr("College"), Expr::string("College"));
    }
}
