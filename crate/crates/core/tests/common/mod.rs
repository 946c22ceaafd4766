//! Helpers shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use pgstudio_core::catalog::{ColumnDef, IndexColumn, IndexDef, IndexMethod, SchemaCatalog, TableDef};
use pgstudio_core::graph::{property_schema_in, ElementId, ElementKind, GraphContext, PropertyValue, QueryGraph, ValueKind};
use pgstudio_core::sql::SortDirection;
use pgstudio_core::workspace::{Mutation, Project};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// Statements of a fixture file. A statement ends with `;` at the end of a
/// line; lines starting with `--` are skipped.
pub fn fixture_queries(name: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for line in read_fixture(name).lines() {
        if line.trim_start().starts_with("--") || (line.trim().is_empty() && cur.is_empty()) {
            continue;
        }
        if !cur.is_empty() {
            cur.push('\n');
        }
        cur.push_str(line);
        if line.trim_end().ends_with(';') {
            out.push(std::mem::take(&mut cur));
        }
    }
    assert!(cur.trim().is_empty(), "unterminated statement in {name}: {cur}");
    out
}

/// One malformed query per non-comment line, kept verbatim.
pub fn malformed_queries() -> Vec<String> {
    read_fixture("malformed.sql").lines().filter(|l| !l.trim_start().starts_with("--") && !l.trim().is_empty()).map(str::to_string).collect()
}

/// `customers` and `orders` in `public`; `customers.id` is a primary key and
/// `customers.email` is UNIQUE NOT NULL.
pub fn shop_catalog() -> SchemaCatalog {
    let mut c = SchemaCatalog::new();
    c.add_table(TableDef::new(
        "public",
        "customers",
        vec![
            ColumnDef::new("id", "integer").primary_key(),
            ColumnDef::new("name", "text"),
            ColumnDef::new("age", "integer"),
            ColumnDef::new("city", "text"),
            ColumnDef::new("email", "text").with(pgstudio_core::catalog::ConstraintDef::unique()).with(pgstudio_core::catalog::ConstraintDef::not_null()),
        ],
    ))
    .unwrap();
    c.add_table(TableDef::new(
        "public",
        "orders",
        vec![ColumnDef::new("id", "integer").primary_key(), ColumnDef::new("customer_id", "integer"), ColumnDef::new("total", "numeric"), ColumnDef::new("status", "text")],
    ))
    .unwrap();
    c
}

pub fn text(s: &str) -> PropertyValue {
    PropertyValue::Text(s.into())
}

pub fn list(items: &[&str]) -> PropertyValue {
    PropertyValue::List(items.iter().map(|s| s.to_string()).collect())
}

/// A graph described clause by clause. Tables either feed SELECT directly or,
/// with `join`, through one JOIN element.
#[derive(Default, Clone, Copy)]
pub struct Shape<'a> {
    pub tables: &'a [&'a str],
    pub join: Option<(&'a str, &'a str)>,
    pub columns: &'a [&'a str],
    pub aggregates: &'a [&'a str],
    pub distinct: bool,
    pub wheres: &'a [(&'a str, &'a str, &'a str)],
    pub subquery_where: Option<(&'a str, &'a str, &'a str)>,
    pub group_by: &'a [&'a str],
    pub havings: &'a [(&'a str, &'a str, &'a str, &'a str)],
    pub order_by: &'a [(&'a str, Option<&'a str>)],
}

pub struct GraphCase {
    pub name: &'static str,
    pub graph: QueryGraph,
    pub expected_sql: &'static str,
    /// Other graphs the case refers to, including itself under `name`.
    pub siblings: BTreeMap<String, QueryGraph>,
}

impl GraphCase {
    pub fn context<'a>(&'a self, catalog: &'a SchemaCatalog) -> GraphContext<'a> {
        GraphContext::with_siblings(catalog, &self.siblings, self.name)
    }
}

/// Builds `shape` through the public editing operations only.
pub fn build(shape: &Shape<'_>, ctx: &GraphContext<'_>) -> QueryGraph {
    let mut g = QueryGraph::new();
    let mut slot = 0i64;
    let mut place = |g: &mut QueryGraph, kind: ElementKind| -> ElementId {
        slot += 1;
        g.drop_element(kind, (slot * 97) % 700, (slot * 53) % 560).unwrap()
    };
    let set = |g: &mut QueryGraph, id: ElementId, key: &str, v: PropertyValue| {
        g.set_property_in(id, key, v.clone(), ctx).unwrap_or_else(|e| panic!("setting {key} = {v}: {e}"));
    };
    let s = place(&mut g, ElementKind::Select);
    let tables: Vec<ElementId> = shape
        .tables
        .iter()
        .map(|name| {
            let t = place(&mut g, ElementKind::Table);
            set(&mut g, t, "table_name", text(name));
            t
        })
        .collect();
    match shape.join {
        Some((l, r)) => {
            let j = place(&mut g, ElementKind::Join);
            for t in &tables {
                g.connect(*t, j).unwrap();
            }
            g.connect(j, s).unwrap();
            set(&mut g, j, "left_column", text(l));
            set(&mut g, j, "right_column", text(r));
        }
        None => {
            for t in &tables {
                g.connect(*t, s).unwrap();
            }
        }
    }
    if !shape.columns.is_empty() {
        set(&mut g, s, "columns", list(shape.columns));
    }
    if !shape.aggregates.is_empty() {
        set(&mut g, s, "aggregates", list(shape.aggregates));
    }
    if shape.distinct {
        set(&mut g, s, "distinct", PropertyValue::Bool(true));
    }
    for (c, op, v) in shape.wheres {
        let w = place(&mut g, ElementKind::Where);
        g.connect(w, s).unwrap();
        set(&mut g, w, "column", text(c));
        set(&mut g, w, "operator", text(op));
        set(&mut g, w, "value", text(v));
    }
    if let Some((c, op, sub)) = shape.subquery_where {
        let w = place(&mut g, ElementKind::Where);
        g.connect(w, s).unwrap();
        set(&mut g, w, "column", text(c));
        set(&mut g, w, "operator", text(op));
        set(&mut g, w, "subquery", text(sub));
    }
    if !shape.group_by.is_empty() {
        let gb = place(&mut g, ElementKind::GroupBy);
        g.connect(gb, s).unwrap();
        set(&mut g, gb, "columns", list(shape.group_by));
        for (agg, c, op, v) in shape.havings {
            let h = place(&mut g, ElementKind::Having);
            g.connect(h, gb).unwrap();
            set(&mut g, h, "aggregate", text(agg));
            set(&mut g, h, "column", text(c));
            set(&mut g, h, "operator", text(op));
            set(&mut g, h, "value", text(v));
        }
    }
    for (c, dir) in shape.order_by {
        let o = place(&mut g, ElementKind::OrderBy);
        g.connect(o, s).unwrap();
        set(&mut g, o, "column", text(c));
        if let Some(d) = dir {
            set(&mut g, o, "direction", text(d));
        }
    }
    g
}

fn case(name: &'static str, shape: Shape<'_>, expected_sql: &'static str, catalog: &SchemaCatalog, siblings: &BTreeMap<String, QueryGraph>) -> GraphCase {
    let ctx = GraphContext::with_siblings(catalog, siblings, name);
    let graph = build(&shape, &ctx);
    let mut siblings = siblings.clone();
    siblings.insert(name.to_string(), graph.clone());
    GraphCase { name, graph, expected_sql, siblings }
}

/// Complete graphs over [`shop_catalog`], each with the SQL it must lower to,
/// written out by hand.
pub fn graph_corpus(catalog: &SchemaCatalog) -> Vec<GraphCase> {
    let none = BTreeMap::new();
    let oldest = case("oldest", Shape { tables: &["customers"], aggregates: &["MAX(age)"], ..Shape::default() }, "SELECT MAX(age) FROM customers;", catalog, &none);
    let big_order = case("big_order", Shape { tables: &["orders"], aggregates: &["AVG(total)"], ..Shape::default() }, "SELECT AVG(total) FROM orders;", catalog, &none);
    let mut subs = BTreeMap::new();
    subs.insert("oldest".to_string(), oldest.graph.clone());
    subs.insert("big_order".to_string(), big_order.graph.clone());
    let c = |name, shape, sql| case(name, shape, sql, catalog, &none);
    let join = Some(("id", "customer_id"));
    vec![
        c("one_column", Shape { tables: &["customers"], columns: &["name"], ..Shape::default() }, "SELECT name FROM customers;"),
        c("star", Shape { tables: &["customers"], columns: &["*"], ..Shape::default() }, "SELECT * FROM customers;"),
        c("two_columns", Shape { tables: &["customers"], columns: &["name", "age"], ..Shape::default() }, "SELECT name, age FROM customers;"),
        c("distinct_city", Shape { tables: &["customers"], columns: &["city"], distinct: true, ..Shape::default() }, "SELECT DISTINCT city FROM customers;"),
        c("adults", Shape { tables: &["customers"], columns: &["name"], wheres: &[("age", ">", "30")], ..Shape::default() }, "SELECT name FROM customers WHERE age > 30;"),
        c(
            "two_filters",
            Shape { tables: &["customers"], columns: &["name"], wheres: &[("age", ">=", "18"), ("city", "=", "'Oslo'")], ..Shape::default() },
            "SELECT name FROM customers WHERE age >= 18 AND city = 'Oslo';",
        ),
        c("bare_text_value", Shape { tables: &["customers"], columns: &["name"], wheres: &[("city", "<>", "Bergen")], ..Shape::default() }, "SELECT name FROM customers WHERE city <> 'Bergen';"),
        c("sorted_desc", Shape { tables: &["customers"], columns: &["name", "age"], order_by: &[("age", Some("DESC"))], ..Shape::default() }, "SELECT name, age FROM customers ORDER BY age DESC;"),
        c(
            "two_sort_keys",
            Shape { tables: &["customers"], columns: &["name"], order_by: &[("city", Some("ASC")), ("name", None)], ..Shape::default() },
            "SELECT name FROM customers ORDER BY city, name;",
        ),
        c("count_all", Shape { tables: &["customers"], aggregates: &["COUNT(*)"], ..Shape::default() }, "SELECT COUNT(*) FROM customers;"),
        c("age_range", Shape { tables: &["customers"], aggregates: &["MAX(age)", "MIN(age)"], ..Shape::default() }, "SELECT MAX(age), MIN(age) FROM customers;"),
        c(
            "per_city",
            Shape { tables: &["customers"], columns: &["city"], aggregates: &["COUNT(*)"], group_by: &["city"], ..Shape::default() },
            "SELECT city, COUNT(*) FROM customers GROUP BY city;",
        ),
        c(
            "busy_cities",
            Shape { tables: &["customers"], columns: &["city"], aggregates: &["AVG(age)"], group_by: &["city"], havings: &[("COUNT", "*", ">", "5")], ..Shape::default() },
            "SELECT city, AVG(age) FROM customers GROUP BY city HAVING COUNT(*) > 5;",
        ),
        c(
            "everything_single_table",
            Shape {
                tables: &["customers"],
                columns: &["city"],
                aggregates: &["COUNT(*)"],
                wheres: &[("age", ">", "18")],
                group_by: &["city"],
                havings: &[("MAX", "age", "<", "90")],
                order_by: &[("city", None)],
                ..Shape::default()
            },
            "SELECT city, COUNT(*) FROM customers WHERE age > 18 GROUP BY city HAVING MAX(age) < 90 ORDER BY city;",
        ),
        c(
            "join",
            Shape { tables: &["customers", "orders"], join, columns: &["customers.name", "orders.total"], ..Shape::default() },
            "SELECT customers.name, orders.total FROM customers JOIN orders ON customers.id = orders.customer_id;",
        ),
        c(
            "join_filtered",
            Shape { tables: &["customers", "orders"], join, columns: &["customers.name"], wheres: &[("orders.total", ">", "100")], ..Shape::default() },
            "SELECT customers.name FROM customers JOIN orders ON customers.id = orders.customer_id WHERE orders.total > 100;",
        ),
        c(
            "join_grouped",
            Shape {
                tables: &["customers", "orders"],
                join,
                columns: &["customers.name"],
                aggregates: &["SUM(orders.total)"],
                group_by: &["customers.name"],
                order_by: &[("customers.name", Some("DESC"))],
                ..Shape::default()
            },
            "SELECT customers.name, SUM(orders.total) FROM customers JOIN orders ON customers.id = orders.customer_id GROUP BY customers.name ORDER BY customers.name DESC;",
        ),
        c(
            "status_totals",
            Shape { tables: &["orders"], columns: &["status"], aggregates: &["SUM(total)"], group_by: &["status"], ..Shape::default() },
            "SELECT status, SUM(total) FROM orders GROUP BY status;",
        ),
        c(
            "cheap_shipped",
            Shape { tables: &["orders"], columns: &["id"], wheres: &[("status", "=", "'shipped'"), ("total", "<=", "50.5")], order_by: &[("id", Some("DESC"))], ..Shape::default() },
            "SELECT id FROM orders WHERE status = 'shipped' AND total <= 50.5 ORDER BY id DESC;",
        ),
        c(
            "distinct_filtered",
            Shape { tables: &["orders"], columns: &["status"], distinct: true, wheres: &[("total", ">", "0")], ..Shape::default() },
            "SELECT DISTINCT status FROM orders WHERE total > 0;",
        ),
        c("cross_product", Shape { tables: &["customers", "orders"], columns: &["customers.name", "orders.id"], ..Shape::default() }, "SELECT customers.name, orders.id FROM customers, orders;"),
        c(
            "two_havings",
            Shape {
                tables: &["orders"],
                columns: &["customer_id"],
                aggregates: &["COUNT(*)"],
                group_by: &["customer_id"],
                havings: &[("COUNT", "*", ">", "1"), ("SUM", "total", ">=", "100")],
                ..Shape::default()
            },
            "SELECT customer_id, COUNT(*) FROM orders GROUP BY customer_id HAVING COUNT(*) > 1 AND SUM(total) >= 100;",
        ),
        case(
            "oldest_customers",
            Shape { tables: &["customers"], columns: &["name"], subquery_where: Some(("age", "=", "oldest")), ..Shape::default() },
            "SELECT name FROM customers WHERE age = (SELECT MAX(age) FROM customers);",
            catalog,
            &subs,
        ),
        case(
            "above_average",
            Shape { tables: &["orders"], columns: &["id", "total"], wheres: &[("status", "<>", "'void'")], subquery_where: Some(("total", ">", "big_order")), ..Shape::default() },
            "SELECT id, total FROM orders WHERE status <> 'void' AND total > (SELECT AVG(total) FROM orders);",
            catalog,
            &subs,
        ),
        oldest,
        big_order,
    ]
}

/// A random edit that is plausible for the project's current state. Some
/// edits are still rejected; callers skip those.
pub fn random_mutation(p: &Project, rng: &mut ChaCha8Rng) -> Mutation {
    let graph_names: Vec<&String> = p.graphs.keys().collect();
    let roll = rng.random_range(0..100);
    if graph_names.is_empty() || roll < 4 {
        return Mutation::CreateGraph { name: format!("g{}", rng.random_range(0..6)) };
    }
    let gname = (*graph_names.choose(rng).unwrap()).clone();
    let g = &p.graphs[&gname];
    let ids: Vec<ElementId> = g.elements.keys().copied().collect();
    let pick_id = |rng: &mut ChaCha8Rng| ids.choose(rng).copied().unwrap_or(1);
    match roll {
        4..=6 => Mutation::DeleteGraph { name: gname },
        7..=29 => {
            let kind = *ElementKind::ALL.choose(rng).unwrap();
            Mutation::DropElement { graph: gname, kind, x: rng.random_range(-200..1200), y: rng.random_range(-200..900) }
        }
        30..=35 => Mutation::RemoveElement { graph: gname, id: pick_id(rng) },
        36..=45 => Mutation::MoveElement { graph: gname, id: pick_id(rng), x: rng.random_range(-200..1200), y: rng.random_range(-200..900) },
        46..=62 => Mutation::Connect { graph: gname, from: pick_id(rng), to: pick_id(rng) },
        63..=66 => match g.connections.choose(rng) {
            Some(c) => Mutation::Disconnect { graph: gname, from: c.from, to: c.to },
            None => Mutation::Disconnect { graph: gname, from: 1, to: 2 },
        },
        67..=84 => {
            let id = pick_id(rng);
            let ctx = GraphContext::with_siblings(&p.catalog, &p.graphs, &gname);
            let Ok(schema) = property_schema_in(g, id, &ctx) else {
                return Mutation::SetProperty { graph: gname, id, key: "columns".into(), value: list(&[]) };
            };
            let entry = schema.entries.choose(rng).unwrap().clone();
            let value = match entry.value_kind {
                ValueKind::Boolean => PropertyValue::Bool(rng.random_bool(0.5)),
                ValueKind::Text => text(["30", "'Oslo'", "2.5", "College", "0"].choose(rng).unwrap()),
                ValueKind::Choice => text(entry.allowed.choose(rng).map(String::as_str).unwrap_or("nothing")),
                ValueKind::MultiChoice => {
                    let n = rng.random_range(0..=entry.allowed.len().min(3));
                    PropertyValue::List(entry.allowed.choose_multiple(rng, n).cloned().collect())
                }
            };
            Mutation::SetProperty { graph: gname, id, key: entry.key, value }
        }
        85..=88 => {
            let name = format!("t{}", rng.random_range(0..4));
            Mutation::AddTable { table: TableDef::new("public", &name, vec![ColumnDef::new("a", "integer"), ColumnDef::new("b", "text")]) }
        }
        89..=90 => Mutation::RemoveTable { name: format!("public.t{}", rng.random_range(0..4)) },
        91..=93 => {
            let table = format!("t{}", rng.random_range(0..4));
            let method = *IndexMethod::ALL.choose(rng).unwrap();
            Mutation::AddIndex {
                index: IndexDef {
                    name: format!("{table}_a_idx{}", rng.random_range(0..2)),
                    table,
                    columns: vec![IndexColumn { name: "a".into(), order: SortDirection::Ascending }],
                    method,
                    unique: rng.random_bool(0.3),
                },
            }
        }
        94 => Mutation::RemoveIndex { name: format!("t{}_a_idx{}", rng.random_range(0..4), rng.random_range(0..2)) },
        95..=97 => Mutation::SaveQuery { name: format!("q{}", rng.random_range(0..3)), sql: format!("SELECT a FROM t WHERE a > {};", rng.random_range(0..9)) },
        _ => Mutation::DeleteSavedQuery { name: format!("q{}", rng.random_range(0..3)) },
    }
}

/// Applies random edits until `count` have been accepted. Returns the state
/// hash after each accepted edit, starting with the initial state.
pub fn random_session(p: &mut Project, rng: &mut ChaCha8Rng, count: usize) -> Vec<String> {
    let mut hashes = vec![p.state_hash()];
    let mut attempts = 0;
    while hashes.len() <= count {
        attempts += 1;
        assert!(attempts < count * 200, "random edits are rejected too often");
        let m = random_mutation(p, rng);
        if p.record_and_apply("tester", m).is_ok() {
            hashes.push(p.state_hash());
        }
    }
    hashes
}

/// The tables used by the optimization examples, with columns named as in
/// those examples.
pub fn example_catalog() -> SchemaCatalog {
    let mut c = SchemaCatalog::new();
    let ints = |names: &[&str]| names.iter().map(|n| ColumnDef::new(n, "integer")).collect::<Vec<_>>();
    c.add_table(TableDef::new("public", "table_name", ints(&["col_1", "col_2", "col_3", "col_4"]))).unwrap();
    c.add_table(TableDef::new("public", "tablename1", ints(&["col1", "col2", "col3", "col4", "testvalue1"]))).unwrap();
    c.add_table(TableDef::new("public", "tablename2", ints(&["col2", "col3"]))).unwrap();
    c.add_table(TableDef::new("public", "Customers", vec![ColumnDef::new("SSN", "integer"), ColumnDef::new("address", "text"), ColumnDef::new("education", "text")])).unwrap();
    c
}

pub const STAR_QUERY: &str = "SELECT * FROM table_name;";
pub const STAR_INSTEAD: &str = "SELECT col_1, col_2, col_3, col_4\n FROM table_name;";
pub const SUBQUERY_QUERY: &str = "SELECT col1\nFROM tablename1\nWHERE col2 =\n(SELECT MAX (col2)\nFROM tablename2)\nAND col3 =\n(SELECT MAX (col3)\nFROM tablename2)\nAND col4 = testvalue1;";
pub const SUBQUERY_INSTEAD: &str = "SELECT col1\nFROM tablename1\nWHERE (col2, col3) =\n(SELECT MAX (col2), MAX (col3)\nFROM tablename2)\nAND col4 = testvalue1";
pub const CUSTOMERS_QUERY: &str = "SELECT SSN, address FROM Customers WHERE credit_score (SSN) >600 AND education='College' ;";

/// Text with whitespace, case and a final semicolon ignored.
pub fn squash(s: &str) -> String {
    s.trim().trim_end_matches(';').chars().filter(|c| !c.is_whitespace()).flat_map(char::to_lowercase).collect()
}
