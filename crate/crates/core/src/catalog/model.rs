use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use super::types::DataTypeName;
use crate::sql::{Expr, SortDirection};

pub const DEFAULT_SCHEMA: &str = "public";

fn unlimited() -> i64 {
    -1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatabaseDef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub character_classification: Option<String>,
    /// `-1` means unlimited.
    #[serde(default = "unlimited")]
    pub connection_limit: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl DatabaseDef {
    pub fn named(name: &str) -> Self {
        DatabaseDef {
            name: name.to_string(),
            template: None,
            owner: None,
            collation: None,
            character_classification: None,
            connection_limit: -1,
            description: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConstraintKind {
    NotNull,
    Unique,
    ForeignKey,
    Check,
    Exclusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintLevel {
    Column,
    Table,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintDef {
    pub kind: ConstraintKind,
    pub level: ConstraintLevel,
    /// For column-level constraints this is empty or the owning column.
    #[serde(default)]
    pub columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_expression: Option<Expr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub referenced_table: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub referenced_columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion_operator: Option<String>,
}

impl ConstraintDef {
    fn base(kind: ConstraintKind, level: ConstraintLevel, columns: Vec<String>) -> Self {
        ConstraintDef {
            kind,
            level,
            columns,
            check_expression: None,
            referenced_table: None,
            referenced_columns: Vec::new(),
            exclusion_operator: None,
        }
    }

    pub fn not_null() -> Self {
        Self::base(ConstraintKind::NotNull, ConstraintLevel::Column, Vec::new())
    }

    pub fn unique() -> Self {
        Self::base(ConstraintKind::Unique, ConstraintLevel::Column, Vec::new())
    }

    pub fn unique_table(columns: &[&str]) -> Self {
        Self::base(ConstraintKind::Unique, ConstraintLevel::Table, columns.iter().map(|c| c.to_string()).collect())
    }

    pub fn check(expr: Expr, level: ConstraintLevel) -> Self {
        ConstraintDef { check_expression: Some(expr), ..Self::base(ConstraintKind::Check, level, Vec::new()) }
    }

    pub fn references(table: &str, columns: &[&str]) -> Self {
        ConstraintDef {
            referenced_table: Some(table.to_string()),
            referenced_columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::base(ConstraintKind::ForeignKey, ConstraintLevel::Column, Vec::new())
        }
    }

    pub fn foreign_key(columns: &[&str], table: &str, referenced: &[&str]) -> Self {
        ConstraintDef {
            level: ConstraintLevel::Table,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::references(table, referenced)
        }
    }

    pub fn exclusion(columns: &[&str], operator: &str) -> Self {
        ConstraintDef {
            exclusion_operator: Some(operator.to_string()),
            ..Self::base(ConstraintKind::Exclusion, ConstraintLevel::Table, columns.iter().map(|c| c.to_string()).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    pub data_type: DataTypeName,
    #[serde(default)]
    pub column_constraints: Vec<ConstraintDef>,
}

impl ColumnDef {
    pub fn new(name: &str, data_type: &str) -> Self {
        ColumnDef { name: name.to_string(), data_type: DataTypeName::new(data_type), column_constraints: Vec::new() }
    }

    pub fn with(mut self, c: ConstraintDef) -> Self {
        self.column_constraints.push(c);
        self
    }

    /// UNIQUE + NOT NULL, the composite used in place of a primary key.
    pub fn primary_key(self) -> Self {
        self.with(ConstraintDef::not_null()).with(ConstraintDef::unique())
    }

    pub fn has(&self, kind: ConstraintKind) -> bool {
        self.column_constraints.iter().any(|c| c.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexMethod {
    Btree,
    Hash,
    Gist,
    Gin,
}

impl IndexMethod {
    pub fn supports_unique(self) -> bool {
        matches!(self, IndexMethod::Btree)
    }

    pub fn sql(self) -> &'static str {
        match self {
            IndexMethod::Btree => "btree",
            IndexMethod::Hash => "hash",
            IndexMethod::Gist => "gist",
            IndexMethod::Gin => "gin",
        }
    }

    pub const ALL: [IndexMethod; 4] = [IndexMethod::Btree, IndexMethod::Hash, IndexMethod::Gist, IndexMethod::Gin];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexColumn {
    pub name: String,
    #[serde(default)]
    pub order: SortDirection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexDef {
    pub name: String,
    /// `table` or `schema.table`.
    pub table: String,
    pub columns: Vec<IndexColumn>,
    pub method: IndexMethod,
    #[serde(default)]
    pub unique: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDef {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub columns: Vec<ColumnDef>,
    #[serde(default)]
    pub table_constraints: Vec<ConstraintDef>,
    #[serde(default)]
    pub indexes: Vec<IndexDef>,
}

impl TableDef {
    pub fn new(schema: &str, name: &str, columns: Vec<ColumnDef>) -> Self {
        TableDef {
            schema: schema.to_string(),
            name: name.to_string(),
            description: String::new(),
            columns,
            table_constraints: Vec::new(),
            indexes: Vec::new(),
        }
    }

    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.schema, self.name)
    }

    /// Bare name for tables in the default schema, qualified otherwise.
    pub fn display_name(&self) -> String {
        if self.schema == DEFAULT_SCHEMA {
            self.name.clone()
        } else {
            self.qualified_name()
        }
    }

    pub fn column(&self, name: &str) -> Option<&ColumnDef> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    /// True when `column` is guaranteed distinct and non-null across rows.
    pub fn is_unique_not_null(&self, column: &str) -> bool {
        let Some(col) = self.column(column) else { return false };
        let not_null = col.has(ConstraintKind::NotNull);
        let unique = col.has(ConstraintKind::Unique)
            || self
                .table_constraints
                .iter()
                .any(|c| c.kind == ConstraintKind::Unique && c.columns.len() == 1 && c.columns[0] == column)
            || self.indexes.iter().any(|i| i.unique && i.columns.len() == 1 && i.columns[0].name == column);
        unique && not_null
    }

    pub fn has_unique_constraint(&self, column: &str) -> bool {
        self.column(column).is_some_and(|c| c.has(ConstraintKind::Unique))
            || self
                .table_constraints
                .iter()
                .any(|c| c.kind == ConstraintKind::Unique && c.columns.len() == 1 && c.columns[0] == column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TriggerTiming {
    Before,
    After,
    InsteadOf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TriggerEvent {
    Insert,
    Update,
    Delete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerDef {
    pub name: String,
    pub timing: TriggerTiming,
    pub event: TriggerEvent,
    pub target: String,
    #[serde(default)]
    pub target_is_view: bool,
    pub function_name: String,
}

/// Databases, schemas, tables and triggers known to a project.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaCatalog {
    #[serde(default)]
    pub databases: BTreeMap<String, DatabaseDef>,
    #[serde(default = "default_schemas")]
    pub schemas: BTreeSet<String>,
    #[serde(default, with = "table_list")]
    pub tables: BTreeMap<(String, String), TableDef>,
    #[serde(default)]
    pub triggers: Vec<TriggerDef>,
}

fn default_schemas() -> BTreeSet<String> {
    BTreeSet::from([DEFAULT_SCHEMA.to_string()])
}

impl Default for SchemaCatalog {
    fn default() -> Self {
        SchemaCatalog { databases: BTreeMap::new(), schemas: default_schemas(), tables: BTreeMap::new(), triggers: Vec::new() }
    }
}

impl SchemaCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Resolves `schema.table`, or a bare name in the default schema first and
    /// then in any schema when unambiguous.
    pub fn resolve_table(&self, name: &str) -> Option<&TableDef> {
        if let Some((schema, table)) = name.split_once('.') {
            return self.tables.get(&(schema.to_string(), table.to_string()));
        }
        if let Some(t) = self.tables.get(&(DEFAULT_SCHEMA.to_string(), name.to_string())) {
            return Some(t);
        }
        let mut matches = self.tables.values().filter(|t| t.name == name);
        match (matches.next(), matches.next()) {
            (Some(t), None) => Some(t),
            _ => None,
        }
    }

    pub fn table_names(&self) -> Vec<String> {
        self.tables.values().map(TableDef::display_name).collect()
    }

    pub fn find_index(&self, name: &str) -> Option<(&TableDef, usize)> {
        self.tables.values().find_map(|t| t.indexes.iter().position(|i| i.name == name).map(|p| (t, p)))
    }
}

mod table_list {
    use super::TableDef;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(map: &BTreeMap<(String, String), TableDef>, s: S) -> Result<S::Ok, S::Error> {
        let list: Vec<&TableDef> = map.values().collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(String, String), TableDef>, D::Error> {
        let list = Vec::<TableDef>::deserialize(d)?;
        Ok(list.into_iter().map(|t| ((t.schema.clone(), t.name.clone()), t)).collect())
    }
}
