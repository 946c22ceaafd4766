//! The visual query document: clause elements on a bounded canvas, typed
//! connections between them, and lowering to a [`SelectAst`](crate::sql::SelectAst).

mod lower;
mod properties;

pub use lower::{graph_to_ast, graph_to_ast_in, validate_graph, validate_graph_in, GraphDiagnostic, LowerError};
pub use properties::{property_schema_for, property_schema_in, PropertyEntry, PropertySchema, ValueKind, COMPARISON_SYMBOLS, DIRECTIONS};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::catalog::SchemaCatalog;

pub const GRAPH_VERSION: u32 = 1;
pub const DEFAULT_CANVAS_WIDTH: i64 = 800;
pub const DEFAULT_CANVAS_HEIGHT: i64 = 600;
/// Extent of every element; positions are the element's top-left corner.
pub const ELEMENT_WIDTH: i64 = 120;
pub const ELEMENT_HEIGHT: i64 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ElementKind {
    Select,
    Table,
    Where,
    GroupBy,
    Having,
    OrderBy,
    Join,
}

impl ElementKind {
    pub const ALL: [ElementKind; 7] = [
        ElementKind::Select,
        ElementKind::Table,
        ElementKind::Where,
        ElementKind::GroupBy,
        ElementKind::Having,
        ElementKind::OrderBy,
        ElementKind::Join,
    ];

    /// Kinds this kind may connect to. This table is the whole adjacency rule.
    pub fn allowed_targets(self) -> &'static [ElementKind] {
        use ElementKind::*;
        match self {
            Table => &[Select, Join],
            Join | Where | GroupBy | OrderBy => &[Select],
            Having => &[GroupBy],
            Select => &[],
        }
    }

    pub fn can_connect(self, to: ElementKind) -> bool {
        self.allowed_targets().contains(&to)
    }

    pub fn label(self) -> &'static str {
        match self {
            ElementKind::Select => "SELECT",
            ElementKind::Table => "TABLE",
            ElementKind::Where => "WHERE",
            ElementKind::GroupBy => "GROUP BY",
            ElementKind::Having => "HAVING",
            ElementKind::OrderBy => "ORDER BY",
            ElementKind::Join => "JOIN",
        }
    }

    pub fn parse(s: &str) -> Option<ElementKind> {
        let norm = s.trim().to_ascii_uppercase().replace([' ', '-'], "_");
        ElementKind::ALL.into_iter().find(|k| serde_json::to_value(k).ok().and_then(|v| v.as_str().map(|x| x == norm)).unwrap_or(false))
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropertyValue {
    Bool(bool),
    Text(String),
    List(Vec<String>),
}

impl PropertyValue {
    pub fn as_text(&self) -> Option<&str> {
        match self {
            PropertyValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[String]> {
        match self {
            PropertyValue::List(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            PropertyValue::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Bool(b) => write!(f, "{b}"),
            PropertyValue::Text(s) => write!(f, "“{s}”"),
            PropertyValue::List(v) => write!(f, "[{}]", v.join(", ")),
        }
    }
}

pub type ElementId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanvasElement {
    pub id: ElementId,
    pub kind: ElementKind,
    pub x: i64,
    pub y: i64,
    #[serde(default)]
    pub properties: BTreeMap<String, PropertyValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Connection {
    pub from: ElementId,
    pub to: ElementId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: i64,
    pub height: i64,
}

impl Default for Canvas {
    fn default() -> Self {
        Canvas { width: DEFAULT_CANVAS_WIDTH, height: DEFAULT_CANVAS_HEIGHT }
    }
}

impl Canvas {
    /// Clamps a top-left anchor so the whole element stays on the canvas.
    pub fn clamp(&self, x: i64, y: i64) -> (i64, i64) {
        let max_x = (self.width - ELEMENT_WIDTH).max(0);
        let max_y = (self.height - ELEMENT_HEIGHT).max(0);
        (x.clamp(0, max_x), y.clamp(0, max_y))
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        self.clamp(x, y) == (x, y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "error")]
pub enum GraphError {
    #[error("The canvas already has a SELECT element; a query has exactly one. Use a WHERE subquery to nest another query.")]
    DuplicateSelect,
    #[error("There is no element with id {id} on the canvas.")]
    UnknownElement { id: ElementId },
    #[error("A {from} element cannot be connected to a {to} element. {reason}")]
    IllegalConnection { from: ElementKind, to: ElementKind, allowed: Vec<ElementKind>, reason: String },
    #[error("That connection would form a loop; queries flow in one direction towards SELECT.")]
    CycleDetected,
    #[error("Element {from} is already connected to element {to}.")]
    DuplicateConnection { from: ElementId, to: ElementId },
    #[error("Element {id} already feeds element {to}; each element has a single output. Disconnect it first.")]
    OutputInUse { id: ElementId, to: ElementId },
    #[error("This JOIN already joins two tables.")]
    JoinFull { id: ElementId },
    #[error("SELECT element {id} already has a GROUP BY element; put all grouping columns on that one.")]
    GroupByInUse { id: ElementId },
    #[error("Element {from} is not connected to element {to}.")]
    UnknownConnection { from: ElementId, to: ElementId },
    #[error("A {kind} element has no property “{key}”. Available: {available}.")]
    UnknownProperty { kind: ElementKind, key: String, available: String },
    #[error("{value} is not allowed for “{key}”. {expected}")]
    IllegalValue { key: String, value: String, expected: String },
    #[error("The canvas must be at least {min_width}×{min_height} units.")]
    CanvasTooSmall { min_width: i64, min_height: i64 },
}

fn allowed_text(kind: ElementKind) -> String {
    let t = kind.allowed_targets();
    if t.is_empty() {
        format!("{kind} is where the query ends, so it has no outgoing connections.")
    } else {
        format!("{kind} can connect to: {}.", t.iter().map(|k| k.label()).collect::<Vec<_>>().join(", "))
    }
}

/// A query on a canvas. Invariants: positions are in bounds, at most one
/// SELECT, every connection is allowed by the adjacency table, each element
/// has at most one outgoing connection and the graph is acyclic.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "GraphDocument", into = "GraphDocument")]
pub struct QueryGraph {
    pub canvas: Canvas,
    pub elements: BTreeMap<ElementId, CanvasElement>,
    pub connections: Vec<Connection>,
}

/// Serialized form of a [`QueryGraph`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub version: u32,
    pub canvas: Canvas,
    pub elements: Vec<CanvasElement>,
    pub connections: Vec<Connection>,
}

impl From<QueryGraph> for GraphDocument {
    fn from(g: QueryGraph) -> Self {
        GraphDocument { version: GRAPH_VERSION, canvas: g.canvas, elements: g.elements.into_values().collect(), connections: g.connections }
    }
}

impl TryFrom<GraphDocument> for QueryGraph {
    type Error = String;

    fn try_from(doc: GraphDocument) -> Result<Self, String> {
        if doc.version != GRAPH_VERSION {
            return Err(format!("unsupported graph version {}; this build reads version {GRAPH_VERSION}", doc.version));
        }
        let mut g = QueryGraph::with_canvas(doc.canvas).map_err(|e| e.to_string())?;
        for el in doc.elements {
            if !g.canvas.contains(el.x, el.y) {
                return Err(format!("element {} at ({}, {}) lies outside the canvas", el.id, el.x, el.y));
            }
            if g.elements.contains_key(&el.id) {
                return Err(format!("element id {} appears twice", el.id));
            }
            if el.kind == ElementKind::Select && g.select_id().is_some() {
                return Err("more than one SELECT element".into());
            }
            g.elements.insert(el.id, el);
        }
        for c in doc.connections {
            g.connect(c.from, c.to).map_err(|e| format!("connection {} → {}: {e}", c.from, c.to))?;
        }
        Ok(g)
    }
}

impl QueryGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_canvas(canvas: Canvas) -> Result<Self, GraphError> {
        if canvas.width < ELEMENT_WIDTH || canvas.height < ELEMENT_HEIGHT {
            return Err(GraphError::CanvasTooSmall { min_width: ELEMENT_WIDTH, min_height: ELEMENT_HEIGHT });
        }
        Ok(QueryGraph { canvas, ..Default::default() })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn element(&self, id: ElementId) -> Result<&CanvasElement, GraphError> {
        self.elements.get(&id).ok_or(GraphError::UnknownElement { id })
    }

    pub fn select_id(&self) -> Option<ElementId> {
        self.elements.values().find(|e| e.kind == ElementKind::Select).map(|e| e.id)
    }

    pub fn next_id(&self) -> ElementId {
        self.elements.keys().next_back().map_or(1, |m| m + 1)
    }

    /// Sources of `id` in connection order.
    pub fn inputs(&self, id: ElementId) -> Vec<&CanvasElement> {
        self.connections.iter().filter(|c| c.to == id).filter_map(|c| self.elements.get(&c.from)).collect()
    }

    pub fn output(&self, id: ElementId) -> Option<&CanvasElement> {
        self.connections.iter().find(|c| c.from == id).and_then(|c| self.elements.get(&c.to))
    }

    /// Adds a fresh element with empty properties, clamped into the canvas.
    pub fn drop_element(&mut self, kind: ElementKind, x: i64, y: i64) -> Result<ElementId, GraphError> {
        if kind == ElementKind::Select && self.select_id().is_some() {
            return Err(GraphError::DuplicateSelect);
        }
        let id = self.next_id();
        let (x, y) = self.canvas.clamp(x, y);
        self.elements.insert(id, CanvasElement { id, kind, x, y, properties: BTreeMap::new() });
        Ok(id)
    }

    /// Puts back an element removed earlier, along with its connections at
    /// their original positions. Used for undo; assumes the removal's state.
    pub fn restore_element(&mut self, element: CanvasElement, connections: Vec<(usize, Connection)>) {
        self.elements.insert(element.id, element);
        for (i, c) in connections {
            let i = i.min(self.connections.len());
            self.connections.insert(i, c);
        }
    }

    /// Returns the old position.
    pub fn move_element(&mut self, id: ElementId, x: i64, y: i64) -> Result<(i64, i64), GraphError> {
        let (x, y) = self.canvas.clamp(x, y);
        let el = self.elements.get_mut(&id).ok_or(GraphError::UnknownElement { id })?;
        let old = (el.x, el.y);
        el.x = x;
        el.y = y;
        Ok(old)
    }

    /// Removes an element and every connection touching it. Returns what was
    /// removed, with connection indices ascending.
    pub fn remove_element(&mut self, id: ElementId) -> Result<(CanvasElement, Vec<(usize, Connection)>), GraphError> {
        let el = self.elements.remove(&id).ok_or(GraphError::UnknownElement { id })?;
        let mut removed = Vec::new();
        let mut kept = Vec::new();
        for (i, c) in self.connections.drain(..).enumerate() {
            if c.from == id || c.to == id {
                removed.push((i, c));
            } else {
                kept.push(c);
            }
        }
        self.connections = kept;
        Ok((el, removed))
    }

    fn reaches(&self, from: ElementId, target: ElementId) -> bool {
        let mut stack = vec![from];
        let mut seen = HashSet::new();
        while let Some(n) = stack.pop() {
            if n == target {
                return true;
            }
            if seen.insert(n) {
                stack.extend(self.connections.iter().filter(|c| c.from == n).map(|c| c.to));
            }
        }
        false
    }

    pub fn connect(&mut self, from: ElementId, to: ElementId) -> Result<(), GraphError> {
        let fk = self.element(from)?.kind;
        let tk = self.element(to)?.kind;
        if from == to {
            return Err(GraphError::IllegalConnection { from: fk, to: tk, allowed: fk.allowed_targets().to_vec(), reason: format!("An element cannot connect to itself. {}", allowed_text(fk)) });
        }
        if self.connections.contains(&Connection { from, to }) {
            return Err(GraphError::DuplicateConnection { from, to });
        }
        if !fk.can_connect(tk) {
            let reason = if fk == ElementKind::Having && tk == ElementKind::Select {
                "HAVING requires GROUP BY: it filters groups, so connect HAVING to a GROUP BY element and that GROUP BY element to SELECT.".to_string()
            } else {
                allowed_text(fk)
            };
            return Err(GraphError::IllegalConnection { from: fk, to: tk, allowed: fk.allowed_targets().to_vec(), reason });
        }
        if let Some(c) = self.connections.iter().find(|c| c.from == from) {
            return Err(GraphError::OutputInUse { id: from, to: c.to });
        }
        if tk == ElementKind::Join && self.inputs(to).len() >= 2 {
            return Err(GraphError::JoinFull { id: to });
        }
        if fk == ElementKind::GroupBy && self.inputs(to).iter().any(|e| e.kind == ElementKind::GroupBy) {
            return Err(GraphError::GroupByInUse { id: to });
        }
        if self.reaches(to, from) {
            return Err(GraphError::CycleDetected);
        }
        self.connections.push(Connection { from, to });
        Ok(())
    }

    /// Removes one connection and returns its former index.
    pub fn disconnect(&mut self, from: ElementId, to: ElementId) -> Result<usize, GraphError> {
        let i = self.connections.iter().position(|c| *c == Connection { from, to }).ok_or(GraphError::UnknownConnection { from, to })?;
        self.connections.remove(i);
        Ok(i)
    }

    /// Re-inserts a connection at `index`, for undo.
    pub fn insert_connection(&mut self, index: usize, c: Connection) {
        let index = index.min(self.connections.len());
        self.connections.insert(index, c);
    }

    /// Stores a property after checking it against the element's current
    /// schema. Returns the previous value.
    pub fn set_property(&mut self, id: ElementId, key: &str, value: PropertyValue, catalog: &SchemaCatalog) -> Result<Option<PropertyValue>, GraphError> {
        self.set_property_in(id, key, value, &GraphContext::new(catalog))
    }

    pub fn set_property_in(&mut self, id: ElementId, key: &str, value: PropertyValue, ctx: &GraphContext<'_>) -> Result<Option<PropertyValue>, GraphError> {
        let schema = property_schema_in(self, id, ctx)?;
        schema.admit(key, &value)?;
        Ok(self.elements.get_mut(&id).expect("schema checked id").properties.insert(key.to_string(), value))
    }

    /// Sets or clears a property without checking, for undo.
    pub fn restore_property(&mut self, id: ElementId, key: &str, value: Option<PropertyValue>) {
        if let Some(el) = self.elements.get_mut(&id) {
            match value {
                Some(v) => el.properties.insert(key.to_string(), v),
                None => el.properties.remove(key),
            };
        }
    }

    /// Elements in topological order (sources first).
    pub fn topological_order(&self) -> Option<Vec<ElementId>> {
        let mut indeg: BTreeMap<ElementId, usize> = self.elements.keys().map(|k| (*k, 0)).collect();
        for c in &self.connections {
            *indeg.get_mut(&c.to)? += 1;
        }
        let mut ready: Vec<ElementId> = indeg.iter().filter(|(_, d)| **d == 0).map(|(k, _)| *k).collect();
        let mut out = Vec::new();
        while let Some(n) = ready.pop() {
            out.push(n);
            for c in self.connections.iter().filter(|c| c.from == n) {
                let d = indeg.get_mut(&c.to)?;
                *d -= 1;
                if *d == 0 {
                    ready.push(c.to);
                }
            }
        }
        (out.len() == self.elements.len()).then_some(out)
    }
}

/// What property schemas and lowering may consult besides the graph itself.
#[derive(Debug, Clone, Copy)]
pub struct GraphContext<'a> {
    pub catalog: &'a SchemaCatalog,
    /// Other graphs of the same project, usable as WHERE subqueries.
    pub siblings: Option<&'a BTreeMap<String, QueryGraph>>,
    /// Name of the graph being edited, excluded from subquery choices.
    pub current: Option<&'a str>,
}

impl<'a> GraphContext<'a> {
    pub fn new(catalog: &'a SchemaCatalog) -> Self {
        GraphContext { catalog, siblings: None, current: None }
    }

    pub fn with_siblings(catalog: &'a SchemaCatalog, siblings: &'a BTreeMap<String, QueryGraph>, current: &'a str) -> Self {
        GraphContext { catalog, siblings: Some(siblings), current: Some(current) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ElementKind::*;

    #[test]
    fn drop_and_clamp() {
        let mut g = QueryGraph::new();
        let t = g.drop_element(Table, 10, 20).unwrap();
        assert_eq!((g.elements[&t].x, g.elements[&t].y), (10, 20));
        let w = g.drop_element(Where, 900, 700).unwrap();
        assert_eq!((g.elements[&w].x, g.elements[&w].y), (800 - ELEMENT_WIDTH, 600 - ELEMENT_HEIGHT));
        g.drop_element(Select, 0, 0).unwrap();
        assert_eq!(g.drop_element(Select, 0, 0), Err(GraphError::DuplicateSelect));
    }

    #[test]
    fn move_clamps_and_reports_unknown() {
        let mut g = QueryGraph::new();
        let t = g.drop_element(Table, 100, 100).unwrap();
        g.move_element(t, 300, 200).unwrap();
        assert_eq!((g.elements[&t].x, g.elements[&t].y), (300, 200));
        g.move_element(t, -5, 10).unwrap();
        assert_eq!((g.elements[&t].x, g.elements[&t].y), (0, 10));
        assert_eq!(g.move_element(99, 0, 0), Err(GraphError::UnknownElement { id: 99 }));
    }

    #[test]
    fn connection_rules() {
        let mut g = QueryGraph::new();
        let s = g.drop_element(Select, 0, 0).unwrap();
        let t = g.drop_element(Table, 0, 0).unwrap();
        let h = g.drop_element(Having, 0, 0).unwrap();
        let w1 = g.drop_element(Where, 0, 0).unwrap();
        let w2 = g.drop_element(Where, 0, 0).unwrap();
        g.connect(t, s).unwrap();
        assert_eq!(g.connect(t, s), Err(GraphError::DuplicateConnection { from: t, to: s }));
        let err = g.connect(h, s).unwrap_err();
        assert!(err.to_string().contains("HAVING requires GROUP BY"), "{err}");
        let err = g.connect(w1, w2).unwrap_err();
        assert!(matches!(err, GraphError::IllegalConnection { from: Where, to: Where, .. }));
        assert!(err.to_string().contains("WHERE can connect to: SELECT"));
        let j = g.drop_element(Join, 0, 0).unwrap();
        assert!(matches!(g.connect(t, j), Err(GraphError::OutputInUse { .. })));
    }

    #[test]
    fn removal_cascades_and_restores() {
        let mut g = QueryGraph::new();
        let s = g.drop_element(Select, 0, 0).unwrap();
        let t = g.drop_element(Table, 0, 0).unwrap();
        let w = g.drop_element(Where, 0, 0).unwrap();
        g.connect(w, s).unwrap();
        g.connect(t, s).unwrap();
        let before = g.clone();
        let (el, conns) = g.remove_element(s).unwrap();
        assert!(g.connections.is_empty());
        g.restore_element(el, conns);
        assert_eq!(g, before);
    }

    #[test]
    fn serialization_field_names() {
        let mut g = QueryGraph::new();
        let s = g.drop_element(Select, 5, 6).unwrap();
        let t = g.drop_element(Table, 7, 8).unwrap();
        g.connect(t, s).unwrap();
        let v: serde_json::Value = serde_json::to_value(&g).unwrap();
        assert_eq!(v["version"], 1);
        assert_eq!(v["canvas"]["width"], 800);
        assert_eq!(v["elements"][0]["kind"], "SELECT");
        assert_eq!(v["connections"][0]["from"], t);
        assert_eq!(QueryGraph::from_json(&g.to_json()).unwrap(), g);
        let bad = g.to_json().replace("\"version\": 1", "\"version\": 2");
        assert!(QueryGraph::from_json(&bad).unwrap_err().contains("unsupported graph version"));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(ElementKind::parse("group by"), Some(GroupBy));
        assert_eq!(ElementKind::parse("ORDER_BY"), Some(OrderBy));
        assert_eq!(ElementKind::parse("nope"), None);
    }
}
