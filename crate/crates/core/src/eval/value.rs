use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::catalog::validate_identifier;

/// A scalar cell. Decimals are never NaN; `-0.0` is stored as `0.0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Decimal(f64),
    Text(String),
}

impl Value {
    pub fn decimal(v: f64) -> Value {
        if v == 0.0 {
            Value::Decimal(0.0)
        } else {
            Value::Decimal(v)
        }
    }

    pub fn text(s: &str) -> Value {
        Value::Text(s.to_string())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Int(_) => "integer",
            Value::Decimal(_) => "decimal",
            Value::Text(_) => "text",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Bool(_) => 0,
            Value::Int(_) | Value::Decimal(_) => 1,
            Value::Text(_) => 2,
            Value::Null => 3,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Decimal(d) => Some(*d),
            _ => None,
        }
    }

    /// SQL comparison between two non-null values of compatible kinds.
    pub fn sql_cmp(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            (Value::Bool(a), Value::Bool(b)) => Some(a.cmp(b)),
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            _ => match (self.as_f64(), other.as_f64()) {
                (Some(a), Some(b)) => a.partial_cmp(&b),
                _ => None,
            },
        }
    }

    /// Sort order used for ORDER BY and canonical bags: kinds grouped,
    /// numbers compared numerically, nulls last.
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        self.rank().cmp(&other.rank()).then_with(|| match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Int(_) | Value::Decimal(_), Value::Int(_) | Value::Decimal(_)) => {
                let (a, b) = (self.as_f64().unwrap(), other.as_f64().unwrap());
                a.total_cmp(&b).then_with(|| matches!(self, Value::Decimal(_)).cmp(&matches!(other, Value::Decimal(_))))
            }
            _ => self.sql_cmp(other).unwrap_or(Ordering::Equal),
        })
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Null, Value::Null) => true,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Decimal(a), Value::Decimal(b)) => a.to_bits() == b.to_bits(),
            (Value::Text(a), Value::Text(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Value::Null => {}
            Value::Bool(b) => b.hash(state),
            Value::Int(i) => i.hash(state),
            Value::Decimal(d) => d.to_bits().hash(state),
            Value::Text(s) => s.hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("NULL"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Decimal(d) => write!(f, "{d}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

pub type Row = Vec<Value>;

/// A bag of rows with named columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Relation {
    pub fn new(columns: &[&str], rows: Vec<Row>) -> Self {
        Relation { columns: columns.iter().map(|c| c.to_string()).collect(), rows }
    }

    /// Rows in canonical order, for order-insensitive comparison.
    pub fn sorted_rows(&self) -> Vec<Row> {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| cmp_rows(a, b));
        rows
    }

    /// Multiset equality of rows; column names are ignored.
    pub fn bag_eq(&self, other: &Relation) -> bool {
        self.columns.len() == other.columns.len() && self.sorted_rows() == other.sorted_rows()
    }
}

pub fn cmp_rows(a: &[Value], b: &[Value]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or_else(|| a.len().cmp(&b.len()))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FixtureError {
    #[error("The fixture could not be read: {0}")]
    Format(String),
    #[error("Table “{table}”: {message}")]
    Table { table: String, message: String },
}

#[derive(Serialize, Deserialize)]
struct FixtureTable {
    name: String,
    columns: Vec<String>,
    rows: Vec<Row>,
}

#[derive(Serialize, Deserialize)]
struct Fixture {
    tables: Vec<FixtureTable>,
}

/// Named relations. Keys are `table` for the default schema and
/// `schema.table` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MiniDb {
    pub tables: BTreeMap<String, Relation>,
}

impl MiniDb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_table(mut self, name: &str, rel: Relation) -> Self {
        self.tables.insert(name.to_string(), rel);
        self
    }

    /// Rejects invalid names, repeated column names and ragged rows.
    pub fn check(&self) -> Result<(), FixtureError> {
        for (name, rel) in &self.tables {
            let err = |message: String| FixtureError::Table { table: name.clone(), message };
            for part in name.split('.') {
                validate_identifier(part).map_err(|e| err(e.to_string()))?;
            }
            let mut seen = std::collections::HashSet::new();
            for c in &rel.columns {
                if !seen.insert(c) {
                    return Err(err(format!("column “{c}” appears twice")));
                }
            }
            if let Some((i, r)) = rel.rows.iter().enumerate().find(|(_, r)| r.len() != rel.columns.len()) {
                return Err(err(format!("row {i} has {} values but there are {} columns", r.len(), rel.columns.len())));
            }
            if rel.rows.iter().flatten().any(|v| matches!(v, Value::Decimal(d) if !d.is_finite())) {
                return Err(err("decimal values must be finite".into()));
            }
        }
        Ok(())
    }

    /// Reads the `tables[] {name, columns[], rows[][]}` fixture format.
    pub fn from_json(text: &str) -> Result<MiniDb, FixtureError> {
        let f: Fixture = serde_json::from_str(text).map_err(|e| FixtureError::Format(e.to_string()))?;
        let mut db = MiniDb::new();
        for t in f.tables {
            if db.tables.contains_key(&t.name) {
                return Err(FixtureError::Table { table: t.name, message: "the table is listed twice".into() });
            }
            let rows = t.rows.into_iter().map(|r| r.into_iter().map(normalize_zero).collect()).collect();
            db.tables.insert(t.name, Relation { columns: t.columns, rows });
        }
        db.check()?;
        Ok(db)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixture serializes")
    }
}

fn normalize_zero(v: Value) -> Value {
    match v {
        Value::Decimal(d) => Value::decimal(d),
        other => other,
    }
}

impl Serialize for MiniDb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let f = Fixture {
            tables: self
                .tables
                .iter()
                .map(|(name, r)| FixtureTable { name: name.clone(), columns: r.columns.clone(), rows: r.rows.clone() })
                .collect(),
        };
        f.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MiniDb {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let f = Fixture::deserialize(d)?;
        let db = MiniDb {
            tables: f
                .tables
                .into_iter()
                .map(|t| (t.name, Relation { columns: t.columns, rows: t.rows.into_iter().map(|r| r.into_iter().map(normalize_zero).collect()).collect() }))
                .collect(),
        };
        db.check().map_err(serde::de::Error::custom)?;
        Ok(db)
    }
}
