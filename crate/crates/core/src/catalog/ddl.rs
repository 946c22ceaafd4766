//! Definition validation and DDL rendering.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;

use super::identifier::{validate_identifier, IdentifierError};
use super::model::*;
use super::types::{is_registered, nearest_type_name, UnknownDataType};
use crate::sql::token::quote_identifier as q;
use crate::sql::{render_expr, SortDirection};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldProblem {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn join_problems(p: &[FieldProblem]) -> String {
    p.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "error")]
pub enum CatalogError {
    #[error("{0}")]
    Identifier(#[from] IdentifierError),
    #[error("The definition is not valid: {}", join_problems(problems))]
    InvalidDefinition { problems: Vec<FieldProblem> },
    #[error("{0}")]
    UnknownDataType(#[from] UnknownDataType),
    #[error("There is no table named “{name}”.")]
    UnknownTable { name: String },
    #[error("Table “{table}” has no column named “{column}”.")]
    UnknownColumn { table: String, column: String },
    #[error("The {method} index method does not support the unique option; only btree indexes can be unique.")]
    UniqueUnsupportedByMethod { method: String },
    #[error("There is no schema named “{name}”; create it first.")]
    UnknownSchema { name: String },
    #[error("There is no database named “{name}”.")]
    UnknownDatabase { name: String },
    #[error("There is no index named “{name}”.")]
    UnknownIndex { name: String },
    #[error("There is no trigger named “{name}”.")]
    UnknownTrigger { name: String },
    #[error("A {kind} named “{name}” already exists.")]
    Duplicate { kind: String, name: String },
    #[error("Schema “{name}” still contains tables; remove them first.")]
    SchemaNotEmpty { name: String },
    #[error("Table “{table}” is still used by {user}.")]
    TableInUse { table: String, user: String },
    #[error("Trigger “{trigger}” uses INSTEAD OF, which only works on views.")]
    InsteadOfRequiresView { trigger: String },
}

impl CatalogError {
    fn invalid(problems: Vec<FieldProblem>) -> Self {
        CatalogError::InvalidDefinition { problems }
    }
}

struct Problems(Vec<FieldProblem>);

impl Problems {
    fn new() -> Self {
        Problems(Vec::new())
    }

    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldProblem { field: field.into(), message: message.into() });
    }

    fn ident(&mut self, field: &str, value: &str) {
        if let Err(e) = validate_identifier(value) {
            self.push(field, e.to_string());
        }
    }

    fn finish(self) -> Result<(), CatalogError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(CatalogError::invalid(self.0))
        }
    }
}

fn quote_literal(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

pub fn validate_database(def: &DatabaseDef) -> Result<(), CatalogError> {
    let mut p = Problems::new();
    p.ident("name", &def.name);
    if let Some(t) = &def.template {
        p.ident("template", t);
    }
    if let Some(o) = &def.owner {
        p.ident("owner", o);
    }
    for (field, v) in [("collation", &def.collation), ("character_classification", &def.character_classification)] {
        if v.as_deref().is_some_and(|s| s.trim().is_empty()) {
            p.push(field, "a locale name cannot be blank");
        }
    }
    if def.connection_limit < -1 {
        p.push("connection_limit", "use -1 for unlimited, or a count of 0 or more");
    }
    p.finish()
}

/// `CREATE DATABASE name [WITH option = value ...];` with options in a fixed
/// order: TEMPLATE, OWNER, LC_COLLATE, LC_CTYPE, CONNECTION LIMIT.
pub fn render_create_database(def: &DatabaseDef) -> Result<String, CatalogError> {
    validate_database(def)?;
    let mut opts = Vec::new();
    if let Some(t) = &def.template {
        opts.push(format!("TEMPLATE = {}", q(t)));
    }
    if let Some(o) = &def.owner {
        opts.push(format!("OWNER = {}", q(o)));
    }
    if let Some(c) = &def.collation {
        opts.push(format!("LC_COLLATE = {}", quote_literal(c)));
    }
    if let Some(c) = &def.character_classification {
        opts.push(format!("LC_CTYPE = {}", quote_literal(c)));
    }
    if def.connection_limit != -1 {
        opts.push(format!("CONNECTION LIMIT = {}", def.connection_limit));
    }
    let mut out = format!("CREATE DATABASE {}", q(&def.name));
    if !opts.is_empty() {
        out.push_str(" WITH ");
        out.push_str(&opts.join(" "));
    }
    out.push(';');
    Ok(out)
}

pub fn render_create_schema(name: &str) -> Result<String, CatalogError> {
    validate_identifier(name)?;
    Ok(format!("CREATE SCHEMA {};", q(name)))
}

fn constraint_shape(c: &ConstraintDef, field: &str, p: &mut Problems) {
    match c.kind {
        ConstraintKind::NotNull if c.level == ConstraintLevel::Table => {
            p.push(field, "NOT NULL can only be set on a single column, not on the whole table")
        }
        ConstraintKind::ForeignKey if c.referenced_table.is_none() => p.push(field, "a foreign key must name the table it refers to"),
        ConstraintKind::Check if c.check_expression.is_none() => p.push(field, "a check constraint needs a condition"),
        ConstraintKind::Exclusion if c.exclusion_operator.as_deref().is_none_or(|o| o.trim().is_empty()) => {
            p.push(field, "an exclusion constraint needs an operator such as =")
        }
        ConstraintKind::Exclusion if c.level == ConstraintLevel::Column => {
            p.push(field, "exclusion constraints are defined on the table, not on a column")
        }
        _ => {}
    }
    if c.kind != ConstraintKind::Check && c.check_expression.is_some() {
        p.push(field, "only check constraints take a condition");
    }
    if c.kind != ConstraintKind::ForeignKey && (c.referenced_table.is_some() || !c.referenced_columns.is_empty()) {
        p.push(field, "only foreign keys refer to another table");
    }
    if c.kind != ConstraintKind::Exclusion && c.exclusion_operator.is_some() {
        p.push(field, "only exclusion constraints take an operator");
    }
    if let Some(t) = &c.referenced_table {
        for part in t.split('.') {
            p.ident(&format!("{field}.referenced_table"), part);
        }
    }
}

fn check_columns_known(def: &TableDef, c: &ConstraintDef, field: &str, p: &mut Problems) {
    if let Some(e) = &c.check_expression {
        for col in e.columns() {
            if def.column(&col.name).is_none() {
                p.push(field, format!("the condition uses “{}”, which is not a column of this table", col.name));
            }
        }
    }
}

/// Checks a table definition on its own (no cross-table references).
pub fn validate_table(def: &TableDef) -> Result<(), CatalogError> {
    let mut p = Problems::new();
    p.ident("schema", &def.schema);
    p.ident("name", &def.name);
    if def.columns.is_empty() {
        p.push("columns", "a table needs at least one column");
    }
    let mut seen = HashSet::new();
    for (i, col) in def.columns.iter().enumerate() {
        let field = format!("columns[{i}]");
        p.ident(&format!("{field}.name"), &col.name);
        if !seen.insert(col.name.as_str()) {
            p.push(format!("{field}.name"), format!("the column name “{}” is used twice", col.name));
        }
        if !is_registered(&col.data_type) {
            p.push(
                format!("{field}.data_type"),
                format!("“{}” is not a known data type; did you mean “{}”?", col.data_type, nearest_type_name(&col.data_type.base())),
            );
        }
        for (j, c) in col.column_constraints.iter().enumerate() {
            let cf = format!("{field}.column_constraints[{j}]");
            if c.level != ConstraintLevel::Column {
                p.push(&cf, "constraints listed on a column must be column-level");
            }
            if !(c.columns.is_empty() || c.columns == [col.name.clone()]) {
                p.push(&cf, "a column constraint can only cover its own column");
            }
            constraint_shape(c, &cf, &mut p);
            check_columns_known(def, c, &cf, &mut p);
        }
    }
    for (j, c) in def.table_constraints.iter().enumerate() {
        let cf = format!("table_constraints[{j}]");
        if c.level != ConstraintLevel::Table {
            p.push(&cf, "constraints listed on the table must be table-level");
        }
        constraint_shape(c, &cf, &mut p);
        if c.kind != ConstraintKind::Check && c.columns.is_empty() {
            p.push(&cf, "choose at least one column");
        }
        for col in &c.columns {
            if def.column(col).is_none() {
                p.push(&cf, format!("“{col}” is not a column of this table"));
            }
        }
        check_columns_known(def, c, &cf, &mut p);
    }
    p.finish()
}

fn render_column_constraint(c: &ConstraintDef) -> String {
    match c.kind {
        ConstraintKind::NotNull => "NOT NULL".into(),
        ConstraintKind::Unique => "UNIQUE".into(),
        ConstraintKind::Check => format!("CHECK ({})", render_expr(c.check_expression.as_ref().expect("validated"))),
        ConstraintKind::ForeignKey => references(c),
        ConstraintKind::Exclusion => unreachable!("exclusion constraints are table-level"),
    }
}

fn references(c: &ConstraintDef) -> String {
    let table = c.referenced_table.as_deref().expect("validated");
    let table = table.split('.').map(q).collect::<Vec<_>>().join(".");
    if c.referenced_columns.is_empty() {
        format!("REFERENCES {table}")
    } else {
        format!("REFERENCES {table} ({})", col_list(&c.referenced_columns))
    }
}

fn col_list(cols: &[String]) -> String {
    cols.iter().map(|c| q(c)).collect::<Vec<_>>().join(", ")
}

fn render_table_constraint(c: &ConstraintDef) -> String {
    match c.kind {
        ConstraintKind::Unique => format!("UNIQUE ({})", col_list(&c.columns)),
        ConstraintKind::Check => format!("CHECK ({})", render_expr(c.check_expression.as_ref().expect("validated"))),
        ConstraintKind::ForeignKey => format!("FOREIGN KEY ({}) {}", col_list(&c.columns), references(c)),
        ConstraintKind::Exclusion => {
            let op = c.exclusion_operator.as_deref().expect("validated").trim();
            let items: Vec<_> = c.columns.iter().map(|col| format!("{} WITH {op}", q(col))).collect();
            format!("EXCLUDE ({})", items.join(", "))
        }
        ConstraintKind::NotNull => unreachable!("NOT NULL is column-level"),
    }
}

/// `CREATE TABLE schema.name (col type constraints..., table constraints...);`
pub fn render_create_table(def: &TableDef) -> Result<String, CatalogError> {
    validate_table(def)?;
    let mut parts: Vec<String> = def
        .columns
        .iter()
        .map(|col| {
            let mut s = format!("{} {}", q(&col.name), col.data_type.canonical());
            for c in &col.column_constraints {
                s.push(' ');
                s.push_str(&render_column_constraint(c));
            }
            s
        })
        .collect();
    parts.extend(def.table_constraints.iter().map(render_table_constraint));
    Ok(format!("CREATE TABLE {}.{} ({});", q(&def.schema), q(&def.name), parts.join(", ")))
}

/// Outcome of a successful index check, with the form hint for the UI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexValidation {
    /// False for methods without unique support; the form hides the field.
    pub unique_option_visible: bool,
    pub hint: Option<String>,
}

pub fn unique_option_hint(method: IndexMethod) -> IndexValidation {
    if method.supports_unique() {
        IndexValidation { unique_option_visible: true, hint: None }
    } else {
        IndexValidation {
            unique_option_visible: false,
            hint: Some(format!("The {} method has no unique option, so the unique field is hidden.", method.sql())),
        }
    }
}

fn validate_index_shape(def: &IndexDef) -> Result<(), CatalogError> {
    validate_identifier(&def.name)?;
    if def.columns.is_empty() {
        return Err(CatalogError::invalid(vec![FieldProblem {
            field: "columns".into(),
            message: "an index needs at least one column".into(),
        }]));
    }
    if def.unique && !def.method.supports_unique() {
        return Err(CatalogError::UniqueUnsupportedByMethod { method: def.method.sql().into() });
    }
    Ok(())
}

/// Valid iff the table and columns exist and `unique` is only used with btree.
pub fn validate_index(def: &IndexDef, catalog: &SchemaCatalog) -> Result<IndexValidation, CatalogError> {
    validate_identifier(&def.name)?;
    let table = catalog.resolve_table(&def.table).ok_or_else(|| CatalogError::UnknownTable { name: def.table.clone() })?;
    for c in &def.columns {
        if table.column(&c.name).is_none() {
            return Err(CatalogError::UnknownColumn { table: def.table.clone(), column: c.name.clone() });
        }
    }
    validate_index_shape(def)?;
    Ok(unique_option_hint(def.method))
}

pub fn render_create_index(def: &IndexDef) -> Result<String, CatalogError> {
    validate_index_shape(def)?;
    let cols: Vec<String> = def
        .columns
        .iter()
        .map(|c| {
            let dir = if c.order == SortDirection::Descending { "DESC" } else { "ASC" };
            format!("{} {dir}", q(&c.name))
        })
        .collect();
    let table = def.table.split('.').map(q).collect::<Vec<_>>().join(".");
    Ok(format!(
        "CREATE {}INDEX {} ON {table} USING {} ({});",
        if def.unique { "UNIQUE " } else { "" },
        q(&def.name),
        def.method.sql(),
        cols.join(", ")
    ))
}

fn validate_trigger_shape(def: &TriggerDef) -> Result<(), CatalogError> {
    let mut p = Problems::new();
    p.ident("name", &def.name);
    for part in def.target.split('.') {
        p.ident("target", part);
    }
    p.ident("function_name", &def.function_name);
    p.finish()?;
    if def.timing == TriggerTiming::InsteadOf && !def.target_is_view {
        return Err(CatalogError::InsteadOfRequiresView { trigger: def.name.clone() });
    }
    Ok(())
}

pub fn validate_trigger(def: &TriggerDef, catalog: &SchemaCatalog) -> Result<(), CatalogError> {
    validate_trigger_shape(def)?;
    if !def.target_is_view && catalog.resolve_table(&def.target).is_none() {
        return Err(CatalogError::UnknownTable { name: def.target.clone() });
    }
    Ok(())
}

pub fn render_create_trigger(def: &TriggerDef) -> Result<String, CatalogError> {
    validate_trigger_shape(def)?;
    let timing = match def.timing {
        TriggerTiming::Before => "BEFORE",
        TriggerTiming::After => "AFTER",
        TriggerTiming::InsteadOf => "INSTEAD OF",
    };
    let event = match def.event {
        TriggerEvent::Insert => "INSERT",
        TriggerEvent::Update => "UPDATE",
        TriggerEvent::Delete => "DELETE",
    };
    let target = def.target.split('.').map(q).collect::<Vec<_>>().join(".");
    Ok(format!(
        "CREATE TRIGGER {} {timing} {event} ON {target} FOR EACH ROW EXECUTE FUNCTION {}();",
        q(&def.name),
        q(&def.function_name)
    ))
}

/// Catalog edits. Each either applies fully or leaves the catalog unchanged.
impl SchemaCatalog {
    pub fn add_database(&mut self, def: DatabaseDef) -> Result<(), CatalogError> {
        validate_database(&def)?;
        if self.databases.contains_key(&def.name) {
            return Err(CatalogError::Duplicate { kind: "database".into(), name: def.name });
        }
        self.databases.insert(def.name.clone(), def);
        Ok(())
    }

    pub fn remove_database(&mut self, name: &str) -> Result<DatabaseDef, CatalogError> {
        self.databases.remove(name).ok_or_else(|| CatalogError::UnknownDatabase { name: name.into() })
    }

    pub fn add_schema(&mut self, name: &str) -> Result<(), CatalogError> {
        validate_identifier(name)?;
        if !self.schemas.insert(name.to_string()) {
            return Err(CatalogError::Duplicate { kind: "schema".into(), name: name.into() });
        }
        Ok(())
    }

    pub fn remove_schema(&mut self, name: &str) -> Result<(), CatalogError> {
        if !self.schemas.contains(name) {
            return Err(CatalogError::UnknownSchema { name: name.into() });
        }
        if self.tables.keys().any(|(s, _)| s == name) {
            return Err(CatalogError::SchemaNotEmpty { name: name.into() });
        }
        self.schemas.remove(name);
        Ok(())
    }

    /// Validates the table, its foreign keys and its indexes, then adds it.
    pub fn add_table(&mut self, def: TableDef) -> Result<(), CatalogError> {
        validate_table(&def)?;
        if !self.schemas.contains(&def.schema) {
            return Err(CatalogError::UnknownSchema { name: def.schema.clone() });
        }
        let key = (def.schema.clone(), def.name.clone());
        if self.tables.contains_key(&key) {
            return Err(CatalogError::Duplicate { kind: "table".into(), name: def.qualified_name() });
        }
        let fks = def
            .columns
            .iter()
            .flat_map(|c| c.column_constraints.iter())
            .chain(def.table_constraints.iter())
            .filter(|c| c.kind == ConstraintKind::ForeignKey);
        for fk in fks {
            let target = fk.referenced_table.as_deref().expect("validated");
            let self_ref = target == def.name || target == def.qualified_name();
            let columns: Vec<String> = if self_ref {
                def.column_names()
            } else {
                self.resolve_table(target)
                    .ok_or_else(|| CatalogError::UnknownTable { name: target.into() })?
                    .column_names()
            };
            for rc in &fk.referenced_columns {
                if !columns.contains(rc) {
                    return Err(CatalogError::UnknownColumn { table: target.into(), column: rc.clone() });
                }
            }
        }
        let mut staged = self.clone();
        let mut def = def;
        let indexes = std::mem::take(&mut def.indexes);
        staged.tables.insert(key.clone(), def);
        for idx in indexes {
            staged.add_index(idx)?;
        }
        *self = staged;
        Ok(())
    }

    pub fn remove_table(&mut self, name: &str) -> Result<TableDef, CatalogError> {
        let t = self.resolve_table(name).ok_or_else(|| CatalogError::UnknownTable { name: name.into() })?;
        let key = (t.schema.clone(), t.name.clone());
        if let Some(tr) = self.triggers.iter().find(|tr| !tr.target_is_view && self.resolve_table(&tr.target).is_some_and(|x| x.schema == key.0 && x.name == key.1)) {
            return Err(CatalogError::TableInUse { table: name.into(), user: format!("trigger “{}”", tr.name) });
        }
        for other in self.tables.values().filter(|o| (o.schema.clone(), o.name.clone()) != key) {
            let refs = other
                .columns
                .iter()
                .flat_map(|c| c.column_constraints.iter())
                .chain(other.table_constraints.iter())
                .filter_map(|c| c.referenced_table.as_deref());
            for r in refs {
                if self.resolve_table(r).is_some_and(|x| x.schema == key.0 && x.name == key.1) {
                    return Err(CatalogError::TableInUse { table: name.into(), user: format!("table “{}”", other.qualified_name()) });
                }
            }
        }
        Ok(self.tables.remove(&key).expect("resolved above"))
    }

    pub fn add_index(&mut self, def: IndexDef) -> Result<(), CatalogError> {
        validate_index(&def, self)?;
        if self.find_index(&def.name).is_some() {
            return Err(CatalogError::Duplicate { kind: "index".into(), name: def.name });
        }
        let t = self.resolve_table(&def.table).expect("validated");
        let key = (t.schema.clone(), t.name.clone());
        self.tables.get_mut(&key).expect("exists").indexes.push(def);
        Ok(())
    }

    /// Removes an index, returning its table key, position and definition.
    pub fn remove_index(&mut self, name: &str) -> Result<((String, String), usize, IndexDef), CatalogError> {
        let (t, pos) = self.find_index(name).ok_or_else(|| CatalogError::UnknownIndex { name: name.into() })?;
        let key = (t.schema.clone(), t.name.clone());
        let def = self.tables.get_mut(&key).expect("exists").indexes.remove(pos);
        Ok((key, pos, def))
    }

    /// Puts back an index removed by [`SchemaCatalog::remove_index`].
    pub fn restore_index(&mut self, key: &(String, String), position: usize, def: IndexDef) -> Result<(), CatalogError> {
        let t = self.tables.get_mut(key).ok_or_else(|| CatalogError::UnknownTable { name: format!("{}.{}", key.0, key.1) })?;
        let position = position.min(t.indexes.len());
        t.indexes.insert(position, def);
        Ok(())
    }

    pub fn add_trigger(&mut self, def: TriggerDef) -> Result<(), CatalogError> {
        validate_trigger(&def, self)?;
        if self.triggers.iter().any(|t| t.name == def.name) {
            return Err(CatalogError::Duplicate { kind: "trigger".into(), name: def.name });
        }
        self.triggers.push(def);
        Ok(())
    }

    pub fn remove_trigger(&mut self, name: &str) -> Result<(usize, TriggerDef), CatalogError> {
        let pos = self.triggers.iter().position(|t| t.name == name).ok_or_else(|| CatalogError::UnknownTrigger { name: name.into() })?;
        Ok((pos, self.triggers.remove(pos)))
    }

    pub fn restore_trigger(&mut self, position: usize, def: TriggerDef) {
        let position = position.min(self.triggers.len());
        self.triggers.insert(position, def);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::{parse_expression, SortDirection};

    fn customers() -> TableDef {
        TableDef::new(
            "public",
            "customers",
            vec![ColumnDef::new("id", "serial").primary_key(), ColumnDef::new("name", "text"), ColumnDef::new("created_at", "timestamp")],
        )
    }

    fn catalog() -> SchemaCatalog {
        let mut c = SchemaCatalog::new();
        c.add_table(customers()).unwrap();
        c
    }

    fn index(method: IndexMethod, unique: bool, col: &str) -> IndexDef {
        IndexDef {
            name: "idx".into(),
            table: "customers".into(),
            columns: vec![IndexColumn { name: col.into(), order: SortDirection::Descending }],
            method,
            unique,
        }
    }

    #[test]
    fn database_minimal_and_options() {
        assert_eq!(render_create_database(&DatabaseDef::named("shop")).unwrap(), "CREATE DATABASE shop;");
        let mut d = DatabaseDef::named("shop");
        d.owner = Some("ana".into());
        d.connection_limit = 5;
        assert_eq!(render_create_database(&d).unwrap(), "CREATE DATABASE shop WITH OWNER = ana CONNECTION LIMIT = 5;");
        d.template = Some("template0".into());
        d.collation = Some("en_US.UTF-8".into());
        d.character_classification = Some("en_US.UTF-8".into());
        assert_eq!(
            render_create_database(&d).unwrap(),
            "CREATE DATABASE shop WITH TEMPLATE = template0 OWNER = ana LC_COLLATE = 'en_US.UTF-8' LC_CTYPE = 'en_US.UTF-8' CONNECTION LIMIT = 5;"
        );
    }

    #[test]
    fn database_digit_first_is_invalid() {
        let err = render_create_database(&DatabaseDef::named("1shop")).unwrap_err();
        assert!(matches!(err, CatalogError::InvalidDefinition { .. }));
        assert!(err.to_string().contains("start with letters"));
    }

    #[test]
    fn schema() {
        assert_eq!(render_create_schema("myschema").unwrap(), "CREATE SCHEMA myschema;");
        assert_eq!(render_create_schema("sales_2024").unwrap(), "CREATE SCHEMA sales_2024;");
        assert!(render_create_schema("2024_sales").unwrap_err().to_string().contains("start with letters"));
    }

    #[test]
    fn table_rendering() {
        let t = TableDef::new("myschema", "mytable", vec![ColumnDef::new("id", "integer")]);
        assert_eq!(render_create_table(&t).unwrap(), "CREATE TABLE myschema.mytable (id integer);");

        let t = TableDef::new("myschema", "mytable", vec![ColumnDef::new("id", "integer").with(ConstraintDef::not_null()).with(ConstraintDef::unique())]);
        assert_eq!(render_create_table(&t).unwrap(), "CREATE TABLE myschema.mytable (id integer NOT NULL UNIQUE);");
    }

    #[test]
    fn table_constraints_render_after_columns() {
        let mut t = TableDef::new(
            "public",
            "orders",
            vec![
                ColumnDef::new("id", "integer"),
                ColumnDef::new("customer_id", "integer").with(ConstraintDef::references("customers", &["id"])),
                ColumnDef::new("total", "numeric(10,2)").with(ConstraintDef::check(parse_expression("total >= 0").unwrap(), ConstraintLevel::Column)),
                ColumnDef::new("room", "integer"),
            ],
        );
        t.table_constraints.push(ConstraintDef::unique_table(&["id", "customer_id"]));
        t.table_constraints.push(ConstraintDef::foreign_key(&["customer_id"], "customers", &["id"]));
        t.table_constraints.push(ConstraintDef::exclusion(&["room"], "="));
        assert_eq!(
            render_create_table(&t).unwrap(),
            "CREATE TABLE public.orders (id integer, customer_id integer REFERENCES customers (id), total numeric(10, 2) CHECK (total >= 0), room integer, UNIQUE (id, customer_id), FOREIGN KEY (customer_id) REFERENCES customers (id), EXCLUDE (room WITH =));"
        );
    }

    #[test]
    fn table_invariants() {
        let t = TableDef::new("public", "empty", vec![]);
        assert!(matches!(render_create_table(&t), Err(CatalogError::InvalidDefinition { .. })));

        let t = TableDef::new("public", "dup", vec![ColumnDef::new("a", "integer"), ColumnDef::new("a", "text")]);
        assert!(render_create_table(&t).unwrap_err().to_string().contains("used twice"));

        let mut t = TableDef::new("public", "t", vec![ColumnDef::new("a", "integer")]);
        t.table_constraints.push(ConstraintDef { level: ConstraintLevel::Table, columns: vec!["a".into()], ..ConstraintDef::not_null() });
        assert!(render_create_table(&t).unwrap_err().to_string().contains("NOT NULL"));

        let mut t = TableDef::new("public", "t", vec![ColumnDef::new("a", "integer")]);
        t.table_constraints.push(ConstraintDef::unique_table(&["b"]));
        assert!(render_create_table(&t).unwrap_err().to_string().contains("“b”"));

        let t = TableDef::new("public", "t", vec![ColumnDef::new("a", "dubble")]);
        assert!(render_create_table(&t).unwrap_err().to_string().contains("double precision"));
    }

    #[test]
    fn index_method_unique_matrix() {
        let c = catalog();
        assert!(validate_index(&index(IndexMethod::Btree, true, "created_at"), &c).unwrap().unique_option_visible);
        assert_eq!(
            validate_index(&index(IndexMethod::Hash, true, "created_at"), &c),
            Err(CatalogError::UniqueUnsupportedByMethod { method: "hash".into() })
        );
        assert!(!validate_index(&index(IndexMethod::Hash, false, "created_at"), &c).unwrap().unique_option_visible);
        assert!(matches!(validate_index(&index(IndexMethod::Btree, false, "nope"), &c), Err(CatalogError::UnknownColumn { .. })));
        let mut i = index(IndexMethod::Btree, false, "id");
        i.table = "ghost".into();
        assert!(matches!(validate_index(&i, &c), Err(CatalogError::UnknownTable { .. })));
    }

    #[test]
    fn index_rendering() {
        assert_eq!(
            render_create_index(&index(IndexMethod::Btree, false, "created_at")).unwrap(),
            "CREATE INDEX idx ON customers USING btree (created_at DESC);"
        );
        assert!(render_create_index(&index(IndexMethod::Btree, true, "id")).unwrap().starts_with("CREATE UNIQUE INDEX"));
        assert!(render_create_index(&index(IndexMethod::Hash, true, "id")).is_err());
    }

    #[test]
    fn triggers() {
        let mut c = catalog();
        let t = TriggerDef {
            name: "audit".into(),
            timing: TriggerTiming::After,
            event: TriggerEvent::Insert,
            target: "customers".into(),
            target_is_view: false,
            function_name: "log_insert".into(),
        };
        assert_eq!(
            render_create_trigger(&t).unwrap(),
            "CREATE TRIGGER audit AFTER INSERT ON customers FOR EACH ROW EXECUTE FUNCTION log_insert();"
        );
        c.add_trigger(t.clone()).unwrap();
        let bad = TriggerDef { timing: TriggerTiming::InsteadOf, name: "x".into(), ..t.clone() };
        assert!(matches!(validate_trigger(&bad, &c), Err(CatalogError::InsteadOfRequiresView { .. })));
        let view = TriggerDef { target_is_view: true, target: "customer_view".into(), ..bad };
        assert!(validate_trigger(&view, &c).is_ok());
        assert!(matches!(c.remove_table("customers"), Err(CatalogError::TableInUse { .. })));
    }

    #[test]
    fn add_table_checks_references() {
        let mut c = catalog();
        let orders = TableDef::new("public", "orders", vec![ColumnDef::new("cid", "integer").with(ConstraintDef::references("customers", &["nope"]))]);
        assert!(matches!(c.add_table(orders), Err(CatalogError::UnknownColumn { .. })));
        let orders = TableDef::new("sales", "orders", vec![ColumnDef::new("cid", "integer")]);
        assert!(matches!(c.add_table(orders.clone()), Err(CatalogError::UnknownSchema { .. })));
        c.add_schema("sales").unwrap();
        c.add_table(orders).unwrap();
        assert_eq!(c.resolve_table("orders").unwrap().schema, "sales");
        assert!(c.remove_schema("sales").is_err());
    }
}
