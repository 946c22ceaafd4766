//! Per-element property schemas. A schema depends only on the element kind,
//! the element's current connections and the catalog.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use super::{ElementId, ElementKind, GraphContext, GraphError, PropertyValue, QueryGraph};
use crate::catalog::{category_of, SchemaCatalog, TableDef, TypeCategory};
use crate::sql::token::quote_identifier;
use crate::sql::{BinaryOp, AGGREGATES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    /// Free text.
    Text,
    /// One of `allowed`.
    Choice,
    /// A list drawn from `allowed`, without repeats.
    MultiChoice,
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyEntry {
    pub key: String,
    pub value_kind: ValueKind,
    pub allowed: Vec<String>,
    pub required: bool,
    pub help: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertySchema {
    pub element: ElementId,
    pub kind: ElementKind,
    pub entries: Vec<PropertyEntry>,
    /// Guidance shown when the element needs connecting before it is useful.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub help: Option<String>,
}

impl PropertySchema {
    pub fn entry(&self, key: &str) -> Option<&PropertyEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    /// Whether `value` may be stored under `key` right now.
    pub fn admit(&self, key: &str, value: &PropertyValue) -> Result<(), GraphError> {
        let entry = self.entry(key).ok_or_else(|| GraphError::UnknownProperty {
            kind: self.kind,
            key: key.to_string(),
            available: self.entries.iter().map(|e| e.key.as_str()).collect::<Vec<_>>().join(", "),
        })?;
        let illegal = |expected: String| Err(GraphError::IllegalValue { key: key.to_string(), value: value.to_string(), expected });
        let choices = || {
            if entry.allowed.is_empty() {
                match &self.help {
                    Some(h) => format!("There is nothing to choose from yet. {h}"),
                    None => "There is nothing to choose from yet.".to_string(),
                }
            } else {
                format!("Choose from: {}.", entry.allowed.join(", "))
            }
        };
        match (entry.value_kind, value) {
            (ValueKind::Boolean, PropertyValue::Bool(_)) => Ok(()),
            (ValueKind::Boolean, _) => illegal("Use true or false.".into()),
            (ValueKind::Text, PropertyValue::Text(s)) if !s.trim().is_empty() => Ok(()),
            (ValueKind::Text, _) => illegal("Type a value.".into()),
            (ValueKind::Choice, PropertyValue::Text(s)) if entry.allowed.contains(s) => Ok(()),
            (ValueKind::Choice, _) => illegal(choices()),
            (ValueKind::MultiChoice, PropertyValue::List(items)) => {
                let mut seen = HashSet::new();
                match items.iter().find(|i| !entry.allowed.contains(i) || !seen.insert(*i)) {
                    None => Ok(()),
                    Some(_) => illegal(format!("{} Each choice may be used once.", choices())),
                }
            }
            (ValueKind::MultiChoice, _) => illegal(format!("Give a list. {}", choices())),
        }
    }
}

pub const COMPARISON_SYMBOLS: [&str; 6] = ["=", "<>", "<", "<=", ">", ">="];
pub const DIRECTIONS: [&str; 2] = ["ASC", "DESC"];

pub(crate) fn comparison_op(sym: &str) -> Option<BinaryOp> {
    BinaryOp::from_symbol(sym).filter(|op| BinaryOp::COMPARISONS.contains(op))
}

fn text_prop<'g>(g: &'g QueryGraph, id: ElementId, key: &str) -> Option<&'g str> {
    g.elements.get(&id)?.properties.get(key)?.as_text()
}

pub(crate) fn table_of<'c>(g: &QueryGraph, id: ElementId, catalog: &'c SchemaCatalog) -> Option<&'c TableDef> {
    catalog.resolve_table(text_prop(g, id, "table_name")?)
}

/// The SELECT element `id` feeds, directly or via one intermediate element.
pub(crate) fn select_for(g: &QueryGraph, id: ElementId) -> Option<ElementId> {
    let mut cur = id;
    for _ in 0..3 {
        let el = g.elements.get(&cur)?;
        if el.kind == ElementKind::Select {
            return Some(cur);
        }
        cur = g.output(cur)?.id;
    }
    None
}

/// TABLE elements feeding a JOIN, in connection order.
pub(crate) fn join_inputs(g: &QueryGraph, join: ElementId) -> Vec<ElementId> {
    g.inputs(join).iter().filter(|e| e.kind == ElementKind::Table).map(|e| e.id).collect()
}

/// TABLE elements feeding a SELECT, directly or through JOINs, in order.
pub(crate) fn source_table_elements(g: &QueryGraph, select: ElementId) -> Vec<ElementId> {
    let mut out = Vec::new();
    for e in g.inputs(select) {
        match e.kind {
            ElementKind::Table => out.push(e.id),
            ElementKind::Join => out.extend(join_inputs(g, e.id)),
            _ => {}
        }
    }
    out
}

pub(crate) fn source_tables<'c>(g: &QueryGraph, select: ElementId, catalog: &'c SchemaCatalog) -> Vec<&'c TableDef> {
    source_table_elements(g, select).into_iter().filter_map(|t| table_of(g, t, catalog)).collect()
}

/// `(choice text, table, column name)`; qualified with the table name when
/// more than one table is in scope.
pub(crate) fn column_choices<'c>(tables: &[&'c TableDef]) -> Vec<(String, &'c TableDef, String)> {
    let qualify = tables.len() > 1;
    tables
        .iter()
        .flat_map(|t| {
            t.columns.iter().map(move |c| {
                let text = if qualify { format!("{}.{}", t.name, c.name) } else { c.name.clone() };
                (text, *t, c.name.clone())
            })
        })
        .collect()
}

fn aggregate_choices(cols: &[(String, &TableDef, String)]) -> Vec<String> {
    let mut out = vec!["COUNT(*)".to_string()];
    for (text, t, name) in cols {
        let sql = text.split('.').map(quote_identifier).collect::<Vec<_>>().join(".");
        let numeric = t.column(name).and_then(|c| category_of(&c.data_type)).is_some_and(|k| matches!(k, TypeCategory::Numeric | TypeCategory::Serial));
        for agg in AGGREGATES {
            if numeric || matches!(agg, "COUNT" | "MIN" | "MAX") {
                out.push(format!("{agg}({sql})"));
            }
        }
    }
    out
}

fn entry(key: &str, value_kind: ValueKind, allowed: Vec<String>, required: bool, help: &str) -> PropertyEntry {
    PropertyEntry { key: key.into(), value_kind, allowed, required, help: help.into() }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn property_schema_for(g: &QueryGraph, id: ElementId, catalog: &SchemaCatalog) -> Result<PropertySchema, GraphError> {
    property_schema_in(g, id, &GraphContext::new(catalog))
}

pub fn property_schema_in(g: &QueryGraph, id: ElementId, ctx: &GraphContext<'_>) -> Result<PropertySchema, GraphError> {
    let el = g.element(id)?;
    let catalog = ctx.catalog;
    let scope = select_for(g, id).map(|s| source_tables(g, s, catalog)).unwrap_or_default();
    let cols = column_choices(&scope);
    let col_names: Vec<String> = cols.iter().map(|c| c.0.clone()).collect();
    let connect_first = |target: &str| Some(format!("Connect this {} element to {target} first; its choices come from the tables feeding the SELECT element.", el.kind));
    let mut help = None;
    let entries = match el.kind {
        ElementKind::Table => vec![entry("table_name", ValueKind::Choice, catalog.table_names(), true, "The table this element reads from.")],
        ElementKind::Select => {
            if cols.is_empty() {
                help = Some("Connect a TABLE element to this SELECT element to choose its columns.".into());
            }
            let mut with_star = col_names.clone();
            if !cols.is_empty() {
                with_star.push("*".into());
            }
            vec![
                entry("columns", ValueKind::MultiChoice, with_star, false, "Columns to show; * shows every column."),
                entry("aggregates", ValueKind::MultiChoice, if cols.is_empty() { Vec::new() } else { aggregate_choices(&cols) }, false, "Summaries such as COUNT(*) or MAX(price)."),
                entry("distinct", ValueKind::Boolean, Vec::new(), false, "Remove duplicate result rows."),
            ]
        }
        ElementKind::Where => {
            if cols.is_empty() {
                help = connect_first("a SELECT element that has a table");
            }
            let mut v = vec![
                entry("column", ValueKind::Choice, col_names, true, "The column to test."),
                entry("operator", ValueKind::Choice, strings(&COMPARISON_SYMBOLS), true, "How to compare the column with the value."),
                entry("value", ValueKind::Text, Vec::new(), true, "The value to compare with, for example 30 or 'College'; or choose a subquery instead."),
            ];
            if let Some(sib) = ctx.siblings {
                let names: Vec<String> = sib.keys().filter(|n| Some(n.as_str()) != ctx.current).cloned().collect();
                if !names.is_empty() {
                    v.push(entry("subquery", ValueKind::Choice, names, false, "Compare with the single value another saved query graph returns."));
                }
            }
            v
        }
        ElementKind::GroupBy => {
            if cols.is_empty() {
                help = connect_first("a SELECT element that has a table");
            }
            vec![entry("columns", ValueKind::MultiChoice, col_names, true, "Rows with equal values in these columns form one group.")]
        }
        ElementKind::Having => {
            if cols.is_empty() {
                help = connect_first("a GROUP BY element that is connected to SELECT");
            }
            let mut with_star = col_names;
            if !cols.is_empty() {
                with_star.push("*".into());
            }
            vec![
                entry("aggregate", ValueKind::Choice, strings(&AGGREGATES), true, "The summary to test for each group."),
                entry("column", ValueKind::Choice, with_star, true, "The column to summarize; * only works with COUNT."),
                entry("operator", ValueKind::Choice, strings(&COMPARISON_SYMBOLS), true, "How to compare the summary with the value."),
                entry("value", ValueKind::Text, Vec::new(), true, "The value to compare with, for example 5."),
            ]
        }
        ElementKind::OrderBy => {
            if cols.is_empty() {
                help = connect_first("a SELECT element that has a table");
            }
            vec![
                entry("column", ValueKind::Choice, col_names, true, "The column to sort by."),
                entry("direction", ValueKind::Choice, strings(&DIRECTIONS), false, "ASC sorts smallest first, DESC largest first."),
            ]
        }
        ElementKind::Join => {
            let inputs = join_inputs(g, id);
            let side = |i: usize| -> Vec<String> {
                inputs.get(i).and_then(|t| table_of(g, *t, catalog)).map(|t| t.column_names()).unwrap_or_default()
            };
            if inputs.len() < 2 {
                help = Some("Connect two TABLE elements to this JOIN element; the first one connected is the left side.".into());
            }
            vec![
                entry("left_column", ValueKind::Choice, side(0), true, "Column of the left table that must match."),
                entry("right_column", ValueKind::Choice, side(1), true, "Column of the right table that must match."),
            ]
        }
    };
    Ok(PropertySchema { element: id, kind: el.kind, entries, help })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ColumnDef, TableDef};
    use ElementKind::*;

    fn catalog() -> SchemaCatalog {
        let mut c = SchemaCatalog::new();
        c.add_table(TableDef::new("public", "t1", vec![ColumnDef::new("a", "integer")])).unwrap();
        c.add_table(TableDef::new("public", "t2", vec![ColumnDef::new("b", "text")])).unwrap();
        c.add_table(TableDef::new("public", "customers", vec![ColumnDef::new("name", "text"), ColumnDef::new("age", "integer")])).unwrap();
        c
    }

    #[test]
    fn table_choices_come_from_catalog() {
        let mut g = QueryGraph::new();
        let t = g.drop_element(Table, 0, 0).unwrap();
        let s = property_schema_for(&g, t, &catalog()).unwrap();
        assert_eq!(s.entry("table_name").unwrap().allowed, vec!["customers", "t1", "t2"]);
    }

    #[test]
    fn select_offers_table_columns_and_star() {
        let cat = catalog();
        let mut g = QueryGraph::new();
        let s = g.drop_element(Select, 0, 0).unwrap();
        let t = g.drop_element(Table, 0, 0).unwrap();
        g.set_property(t, "table_name", PropertyValue::Text("customers".into()), &cat).unwrap();
        g.connect(t, s).unwrap();
        let schema = property_schema_for(&g, s, &cat).unwrap();
        assert_eq!(schema.entry("columns").unwrap().allowed, vec!["name", "age", "*"]);
        let aggs = &schema.entry("aggregates").unwrap().allowed;
        assert!(aggs.contains(&"SUM(age)".to_string()));
        assert!(!aggs.contains(&"SUM(name)".to_string()));
    }

    #[test]
    fn unconnected_order_by_prompts() {
        let mut g = QueryGraph::new();
        let o = g.drop_element(OrderBy, 0, 0).unwrap();
        let s = property_schema_for(&g, o, &catalog()).unwrap();
        assert!(s.entry("column").unwrap().allowed.is_empty());
        assert!(s.help.unwrap().contains("Connect"));
    }

    #[test]
    fn set_property_checks_schema() {
        let cat = catalog();
        let mut g = QueryGraph::new();
        let t = g.drop_element(Table, 0, 0).unwrap();
        assert!(g.set_property(t, "table_name", PropertyValue::Text("customers".into()), &cat).is_ok());
        assert!(matches!(g.set_property(t, "table_name", PropertyValue::Text("nope".into()), &cat), Err(GraphError::IllegalValue { .. })));
        assert!(matches!(g.set_property(t, "colour", PropertyValue::Text("x".into()), &cat), Err(GraphError::UnknownProperty { .. })));
        let w = g.drop_element(Where, 0, 0).unwrap();
        let err = g.set_property(w, "operator", PropertyValue::Text("+".into()), &cat).unwrap_err();
        assert!(err.to_string().contains("Choose from: =, <>, <, <=, >, >="), "{err}");
    }

    #[test]
    fn schema_is_pure() {
        let cat = catalog();
        let mut g = QueryGraph::new();
        let s = g.drop_element(Select, 0, 0).unwrap();
        assert_eq!(property_schema_for(&g, s, &cat), property_schema_for(&g, s, &cat));
    }
}
