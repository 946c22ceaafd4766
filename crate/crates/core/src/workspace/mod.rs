//! Projects, their invertible edit log, persistence, users and storage.

mod document;
mod store;
mod users;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog::{CatalogError, DatabaseDef, IndexDef, SchemaCatalog, TableDef, TriggerDef};
use crate::eval::MiniDb;
use crate::graph::{CanvasElement, Connection, ElementId, ElementKind, GraphContext, GraphError, PropertyValue, QueryGraph};

pub use document::{load_project, save_project, DocumentError, PROJECT_VERSION};
pub use store::{ProjectStore, StoreError};
pub use users::{FakeDigester, NewUser, PasswordDigester, SaltedSha256, StoredAccount, UserAccount, UserDirectory, UserError, UserProfile};

/// One edit of a project. Every variant has an inverse computed when it is
/// applied; the `Restore*` variants exist to serve as inverses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Mutation {
    CreateGraph { name: String },
    DeleteGraph { name: String },
    RestoreGraph { name: String, graph: QueryGraph },
    DropElement { graph: String, kind: ElementKind, x: i64, y: i64 },
    RemoveElement { graph: String, id: ElementId },
    RestoreElement { graph: String, element: CanvasElement, connections: Vec<(usize, Connection)> },
    MoveElement { graph: String, id: ElementId, x: i64, y: i64 },
    Connect { graph: String, from: ElementId, to: ElementId },
    Disconnect { graph: String, from: ElementId, to: ElementId },
    RestoreConnection { graph: String, index: usize, from: ElementId, to: ElementId },
    SetProperty { graph: String, id: ElementId, key: String, value: PropertyValue },
    RestoreProperty { graph: String, id: ElementId, key: String, value: Option<PropertyValue> },
    AddDatabase { database: DatabaseDef },
    RemoveDatabase { name: String },
    AddSchema { name: String },
    RemoveSchema { name: String },
    AddTable { table: TableDef },
    RemoveTable { name: String },
    RestoreTable { table: TableDef },
    AddIndex { index: IndexDef },
    RemoveIndex { name: String },
    RestoreIndex { schema: String, table: String, position: usize, index: IndexDef },
    AddTrigger { trigger: TriggerDef },
    RemoveTrigger { name: String },
    RestoreTrigger { position: usize, trigger: TriggerDef },
    SaveQuery { name: String, sql: String },
    DeleteSavedQuery { name: String },
    RestoreSavedQuery { name: String, sql: Option<String> },
    SetSandbox { db: MiniDb },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEntry {
    pub sequence: u64,
    pub timestamp: DateTime<Utc>,
    pub actor: String,
    pub operation: Mutation,
    pub inverse: Mutation,
    pub human_label: String,
}

/// Linear history: applied entries oldest first, and the entries undone since
/// the last new edit, most recently undone last.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct History {
    pub entries: Vec<ActionEntry>,
    #[serde(default)]
    pub redo: Vec<ActionEntry>,
    /// Never reused, so sequences stay strictly increasing across undo.
    pub next_sequence: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryItem {
    pub sequence: u64,
    pub timestamp: DateTime<Utc>,
    pub human_label: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum WorkspaceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("there is no graph named “{name}” in this project")]
    UnknownGraph { name: String },
    #[error("a graph named “{name}” already exists in this project")]
    DuplicateGraph { name: String },
    #[error("there is no saved query named “{name}”")]
    UnknownSavedQuery { name: String },
    #[error("a name is required")]
    EmptyName,
    #[error("the sandbox data is invalid: {message}")]
    InvalidSandbox { message: String },
    #[error("there is nothing to undo")]
    NothingToUndo,
    #[error("there is nothing to redo")]
    NothingToRedo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub id: String,
    pub name: String,
    pub owner: String,
    pub catalog: SchemaCatalog,
    pub graphs: BTreeMap<String, QueryGraph>,
    pub saved_queries: BTreeMap<String, String>,
    pub sandbox: MiniDb,
    pub history: History,
}

#[derive(Serialize)]
struct StateView<'a> {
    id: &'a str,
    name: &'a str,
    owner: &'a str,
    catalog: &'a SchemaCatalog,
    graphs: &'a BTreeMap<String, QueryGraph>,
    saved_queries: &'a BTreeMap<String, String>,
    sandbox: &'a MiniDb,
}

fn element_label(g: Option<&QueryGraph>, id: ElementId) -> String {
    match g.and_then(|g| g.elements.get(&id)) {
        Some(el) => format!("{} element", el.kind.label()),
        None => format!("element {id}"),
    }
}

impl Project {
    pub fn new(id: &str, owner: &str, name: &str) -> Self {
        Project {
            id: id.to_string(),
            name: name.to_string(),
            owner: owner.to_string(),
            catalog: SchemaCatalog::new(),
            graphs: BTreeMap::new(),
            saved_queries: BTreeMap::new(),
            sandbox: MiniDb::new(),
            history: History { next_sequence: 1, ..History::default() },
        }
    }

    /// Hex sha256 over everything except the history.
    pub fn state_hash(&self) -> String {
        let view = StateView {
            id: &self.id,
            name: &self.name,
            owner: &self.owner,
            catalog: &self.catalog,
            graphs: &self.graphs,
            saved_queries: &self.saved_queries,
            sandbox: &self.sandbox,
        };
        hex::encode(Sha256::digest(serde_json::to_vec(&view).expect("project state serializes")))
    }

    /// Plain-language description of `m` against the current state.
    pub fn label(&self, m: &Mutation) -> String {
        let g = |name: &str| self.graphs.get(name);
        match m {
            Mutation::CreateGraph { name } => format!("Created query graph {name}"),
            Mutation::DeleteGraph { name } => format!("Deleted query graph {name}"),
            Mutation::RestoreGraph { name, .. } => format!("Restored query graph {name}"),
            Mutation::DropElement { kind, .. } => format!("Added {} element", kind.label()),
            Mutation::RemoveElement { graph, id } => format!("Removed {}", element_label(g(graph), *id)),
            Mutation::RestoreElement { element, .. } => format!("Restored {} element", element.kind.label()),
            Mutation::MoveElement { graph, id, .. } => format!("Moved {}", element_label(g(graph), *id)),
            Mutation::Connect { graph, from, to } => format!("Connected {} to {}", element_label(g(graph), *from), element_label(g(graph), *to)),
            Mutation::Disconnect { graph, from, to } => {
                format!("Disconnected {} from {}", element_label(g(graph), *from), element_label(g(graph), *to))
            }
            Mutation::RestoreConnection { graph, from, to, .. } => {
                format!("Reconnected {} to {}", element_label(g(graph), *from), element_label(g(graph), *to))
            }
            Mutation::SetProperty { graph, id, key, value } => format!("Set {key} of {} to {value}", element_label(g(graph), *id)),
            Mutation::RestoreProperty { graph, id, key, value: Some(v) } => format!("Set {key} of {} back to {v}", element_label(g(graph), *id)),
            Mutation::RestoreProperty { graph, id, key, value: None } => format!("Cleared {key} of {}", element_label(g(graph), *id)),
            Mutation::AddDatabase { database } => format!("Created database {}", database.name),
            Mutation::RemoveDatabase { name } => format!("Dropped database {name}"),
            Mutation::AddSchema { name } => format!("Created schema {name}"),
            Mutation::RemoveSchema { name } => format!("Dropped schema {name}"),
            Mutation::AddTable { table } => format!("Created table {}", table.display_name()),
            Mutation::RemoveTable { name } => format!("Dropped table {name}"),
            Mutation::RestoreTable { table } => format!("Restored table {}", table.display_name()),
            Mutation::AddIndex { index } => format!("Created index {} on {}", index.name, index.table),
            Mutation::RemoveIndex { name } => format!("Dropped index {name}"),
            Mutation::RestoreIndex { index, .. } => format!("Restored index {}", index.name),
            Mutation::AddTrigger { trigger } => format!("Created trigger {} on {}", trigger.name, trigger.target),
            Mutation::RemoveTrigger { name } => format!("Dropped trigger {name}"),
            Mutation::RestoreTrigger { trigger, .. } => format!("Restored trigger {}", trigger.name),
            Mutation::SaveQuery { name, .. } => format!("Saved query {name}"),
            Mutation::DeleteSavedQuery { name } => format!("Deleted saved query {name}"),
            Mutation::RestoreSavedQuery { name, sql: Some(_) } => format!("Restored saved query {name}"),
            Mutation::RestoreSavedQuery { name, sql: None } => format!("Removed saved query {name}"),
            Mutation::SetSandbox { db } => format!("Loaded sandbox data ({} tables)", db.tables.len()),
        }
    }

    fn graph_mut(&mut self, name: &str) -> Result<&mut QueryGraph, WorkspaceError> {
        self.graphs.get_mut(name).ok_or_else(|| WorkspaceError::UnknownGraph { name: name.into() })
    }

    /// Applies `m` and returns its inverse. May leave partial changes on
    /// error; callers apply to a draft.
    fn apply(&mut self, m: &Mutation) -> Result<Mutation, WorkspaceError> {
        use Mutation::*;
        Ok(match m.clone() {
            CreateGraph { name } => {
                if name.trim().is_empty() {
                    return Err(WorkspaceError::EmptyName);
                }
                if self.graphs.contains_key(&name) {
                    return Err(WorkspaceError::DuplicateGraph { name });
                }
                self.graphs.insert(name.clone(), QueryGraph::new());
                DeleteGraph { name }
            }
            DeleteGraph { name } => {
                let graph = self.graphs.remove(&name).ok_or_else(|| WorkspaceError::UnknownGraph { name: name.clone() })?;
                RestoreGraph { name, graph }
            }
            RestoreGraph { name, graph } => {
                if self.graphs.contains_key(&name) {
                    return Err(WorkspaceError::DuplicateGraph { name });
                }
                self.graphs.insert(name.clone(), graph);
                DeleteGraph { name }
            }
            DropElement { graph, kind, x, y } => {
                let id = self.graph_mut(&graph)?.drop_element(kind, x, y)?;
                RemoveElement { graph, id }
            }
            RemoveElement { graph, id } => {
                let (element, connections) = self.graph_mut(&graph)?.remove_element(id)?;
                RestoreElement { graph, element, connections }
            }
            RestoreElement { graph, element, connections } => {
                let g = self.graph_mut(&graph)?;
                if g.elements.contains_key(&element.id) {
                    return Err(GraphError::UnknownElement { id: element.id }.into());
                }
                let id = element.id;
                g.restore_element(element, connections);
                RemoveElement { graph, id }
            }
            MoveElement { graph, id, x, y } => {
                let (ox, oy) = self.graph_mut(&graph)?.move_element(id, x, y)?;
                MoveElement { graph, id, x: ox, y: oy }
            }
            Connect { graph, from, to } => {
                self.graph_mut(&graph)?.connect(from, to)?;
                Disconnect { graph, from, to }
            }
            Disconnect { graph, from, to } => {
                let index = self.graph_mut(&graph)?.disconnect(from, to)?;
                RestoreConnection { graph, index, from, to }
            }
            RestoreConnection { graph, index, from, to } => {
                self.graph_mut(&graph)?.insert_connection(index, Connection { from, to });
                Disconnect { graph, from, to }
            }
            SetProperty { graph, id, key, value } => {
                let siblings = self.graphs.clone();
                let catalog = self.catalog.clone();
                let ctx = GraphContext::with_siblings(&catalog, &siblings, &graph);
                let old = self.graph_mut(&graph)?.set_property_in(id, &key, value, &ctx)?;
                RestoreProperty { graph, id, key, value: old }
            }
            RestoreProperty { graph, id, key, value } => {
                let g = self.graph_mut(&graph)?;
                let old = g.element(id)?.properties.get(&key).cloned();
                g.restore_property(id, &key, value);
                RestoreProperty { graph, id, key, value: old }
            }
            AddDatabase { database } => {
                let name = database.name.clone();
                self.catalog.add_database(database)?;
                RemoveDatabase { name }
            }
            RemoveDatabase { name } => AddDatabase { database: self.catalog.remove_database(&name)? },
            AddSchema { name } => {
                self.catalog.add_schema(&name)?;
                RemoveSchema { name }
            }
            RemoveSchema { name } => {
                self.catalog.remove_schema(&name)?;
                AddSchema { name }
            }
            AddTable { table } => {
                let name = table.qualified_name();
                self.catalog.add_table(table)?;
                RemoveTable { name }
            }
            RemoveTable { name } => RestoreTable { table: self.catalog.remove_table(&name)? },
            RestoreTable { table } => {
                let key = (table.schema.clone(), table.name.clone());
                if self.catalog.tables.contains_key(&key) {
                    return Err(CatalogError::Duplicate { kind: "table".into(), name: table.qualified_name() }.into());
                }
                let name = table.qualified_name();
                self.catalog.tables.insert(key, table);
                RemoveTable { name }
            }
            AddIndex { index } => {
                let name = index.name.clone();
                self.catalog.add_index(index)?;
                RemoveIndex { name }
            }
            RemoveIndex { name } => {
                let ((schema, table), position, index) = self.catalog.remove_index(&name)?;
                RestoreIndex { schema, table, position, index }
            }
            RestoreIndex { schema, table, position, index } => {
                let name = index.name.clone();
                self.catalog.restore_index(&(schema, table), position, index)?;
                RemoveIndex { name }
            }
            AddTrigger { trigger } => {
                let name = trigger.name.clone();
                self.catalog.add_trigger(trigger)?;
                RemoveTrigger { name }
            }
            RemoveTrigger { name } => {
                let (position, trigger) = self.catalog.remove_trigger(&name)?;
                RestoreTrigger { position, trigger }
            }
            RestoreTrigger { position, trigger } => {
                let name = trigger.name.clone();
                self.catalog.restore_trigger(position, trigger);
                RemoveTrigger { name }
            }
            SaveQuery { name, sql } => {
                if name.trim().is_empty() {
                    return Err(WorkspaceError::EmptyName);
                }
                let old = self.saved_queries.insert(name.clone(), sql);
                RestoreSavedQuery { name, sql: old }
            }
            DeleteSavedQuery { name } => {
                let old = self.saved_queries.remove(&name).ok_or_else(|| WorkspaceError::UnknownSavedQuery { name: name.clone() })?;
                RestoreSavedQuery { name, sql: Some(old) }
            }
            RestoreSavedQuery { name, sql } => {
                let old = match sql {
                    Some(s) => self.saved_queries.insert(name.clone(), s),
                    None => self.saved_queries.remove(&name),
                };
                RestoreSavedQuery { name, sql: old }
            }
            SetSandbox { db } => {
                db.check().map_err(|e| WorkspaceError::InvalidSandbox { message: e.to_string() })?;
                SetSandbox { db: std::mem::replace(&mut self.sandbox, db) }
            }
        })
    }

    /// Applies `m` to a draft and commits it only on success; returns the new inverse.
    fn apply_atomically(&mut self, m: &Mutation) -> Result<Mutation, WorkspaceError> {
        let history = std::mem::take(&mut self.history);
        let mut draft = self.clone();
        let result = draft.apply(m);
        if result.is_ok() {
            *self = draft;
        }
        self.history = history;
        result
    }

    pub fn record_and_apply(&mut self, actor: &str, m: Mutation) -> Result<ActionEntry, WorkspaceError> {
        self.record_and_apply_at(actor, m, Utc::now())
    }

    pub fn record_and_apply_at(&mut self, actor: &str, m: Mutation, timestamp: DateTime<Utc>) -> Result<ActionEntry, WorkspaceError> {
        let human_label = self.label(&m);
        let inverse = self.apply_atomically(&m)?;
        let sequence = self.history.next_sequence.max(1);
        self.history.next_sequence = sequence + 1;
        let entry = ActionEntry { sequence, timestamp, actor: actor.to_string(), operation: m, inverse, human_label };
        self.history.entries.push(entry.clone());
        self.history.redo.clear();
        Ok(entry)
    }

    /// Reverts the newest entry and moves it to the redo stack.
    pub fn undo(&mut self) -> Result<&ActionEntry, WorkspaceError> {
        let entry = self.history.entries.last().ok_or(WorkspaceError::NothingToUndo)?.clone();
        self.apply_atomically(&entry.inverse)?;
        self.history.entries.pop();
        self.history.redo.push(entry);
        Ok(self.history.redo.last().expect("just pushed"))
    }

    /// Re-applies the most recently undone entry.
    pub fn redo(&mut self) -> Result<&ActionEntry, WorkspaceError> {
        let mut entry = self.history.redo.last().ok_or(WorkspaceError::NothingToRedo)?.clone();
        entry.inverse = self.apply_atomically(&entry.operation)?;
        self.history.redo.pop();
        self.history.entries.push(entry);
        Ok(self.history.entries.last().expect("just pushed"))
    }

    /// Newest-first page of the applied entries.
    pub fn history_view(&self, limit: usize, offset: usize) -> Vec<HistoryItem> {
        self.history
            .entries
            .iter()
            .rev()
            .skip(offset)
            .take(limit)
            .map(|e| HistoryItem { sequence: e.sequence, timestamp: e.timestamp, human_label: e.human_label.clone() })
            .collect()
    }
}
