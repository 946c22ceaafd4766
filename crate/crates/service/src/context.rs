//! Right-click menus for the object tree, fixed per object kind.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextAction {
    pub id: &'static str,
    pub label: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum ContextError {
    #[error("“{kind}” is not an object kind with actions; use one of: {}", OBJECT_KINDS.join(", "))]
    UnknownObjectKind { kind: String },
}

pub const OBJECT_KINDS: [&str; 5] = ["database", "schema", "table", "column", "index"];

const fn a(id: &'static str, label: &'static str) -> ContextAction {
    ContextAction { id, label }
}

const DATABASE: &[ContextAction] = &[a("create_table", "create new table"), a("view_tables", "view existing tables"), a("create_schema", "create new schema"), a("drop_database", "drop database")];
const SCHEMA: &[ContextAction] = &[a("create_table", "create new table"), a("view_tables", "view existing tables"), a("drop_schema", "drop schema")];
const TABLE: &[ContextAction] = &[a("add_column", "add columns"), a("view_columns", "view columns"), a("create_index", "create index"), a("create_trigger", "create trigger"), a("drop_table", "drop table")];
const COLUMN: &[ContextAction] = &[a("view_type", "describe data type"), a("create_index", "create index on this column")];
const INDEX: &[ContextAction] = &[a("view_definition", "view index definition"), a("drop_index", "drop index")];

/// The menu for one kind of object in the tree.
pub fn context_actions(kind: &str) -> Result<&'static [ContextAction], ContextError> {
    match kind.to_ascii_lowercase().as_str() {
        "database" => Ok(DATABASE),
        "schema" => Ok(SCHEMA),
        "table" => Ok(TABLE),
        "column" => Ok(COLUMN),
        "index" => Ok(INDEX),
        _ => Err(ContextError::UnknownObjectKind { kind: kind.to_string() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn database_menu_offers_table_actions() {
        let ids: Vec<_> = context_actions("database").unwrap().iter().map(|a| a.id).collect();
        assert_eq!(&ids[..2], ["create_table", "view_tables"]);
        assert!(ids.contains(&"drop_database"));
        assert!(context_actions("table").unwrap().iter().any(|a| a.id == "drop_table"));
        assert_eq!(context_actions("foo").unwrap_err(), ContextError::UnknownObjectKind { kind: "foo".into() });
        for k in OBJECT_KINDS {
            assert!(!context_actions(k).unwrap().is_empty());
        }
    }
}
