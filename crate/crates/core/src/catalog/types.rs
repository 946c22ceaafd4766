//! Registry of column data types with short descriptions for tooltips.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeCategory {
    Numeric,
    Character,
    Boolean,
    Temporal,
    Serial,
    Binary,
    Other,
}

/// A data type as written in a column definition, e.g. `varchar(40)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DataTypeName(pub String);

impl DataTypeName {
    pub fn new(s: &str) -> Self {
        DataTypeName(s.to_string())
    }

    /// Lower-cased base name with any `(n[, m])` modifier removed and
    /// whitespace collapsed.
    pub fn base(&self) -> String {
        let base = self.0.split('(').next().unwrap_or("");
        base.split_whitespace().collect::<Vec<_>>().join(" ").to_ascii_lowercase()
    }

    /// The modifier text inside parentheses, if any.
    pub fn modifier(&self) -> Option<&str> {
        let open = self.0.find('(')?;
        let close = self.0.rfind(')')?;
        (close > open).then(|| self.0[open + 1..close].trim())
    }

    /// Canonical spelling used in rendered DDL.
    pub fn canonical(&self) -> String {
        let base = lookup(&self.base()).map_or_else(|| self.base(), |d| d.name.to_string());
        match self.modifier() {
            Some(m) => format!("{base}({})", m.split(',').map(str::trim).collect::<Vec<_>>().join(", ")),
            None => base,
        }
    }
}

impl fmt::Display for DataTypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataTypeDescriptor {
    pub name: String,
    pub category: TypeCategory,
    pub tooltip: String,
}

struct Entry {
    name: &'static str,
    category: TypeCategory,
    tooltip: &'static str,
    aliases: &'static [&'static str],
}

const REGISTRY: &[Entry] = &[
    Entry { name: "smallint", category: TypeCategory::Numeric, tooltip: "Small whole number from -32768 to 32767, stored in 2 bytes.", aliases: &["int2"] },
    Entry { name: "integer", category: TypeCategory::Numeric, tooltip: "Whole number from about -2.1 billion to 2.1 billion; the usual choice for counts and ids.", aliases: &["int", "int4"] },
    Entry { name: "bigint", category: TypeCategory::Numeric, tooltip: "Large whole number for values beyond the integer range, stored in 8 bytes.", aliases: &["int8"] },
    Entry { name: "serial", category: TypeCategory::Serial, tooltip: "Auto-incrementing integer: each new row gets the next number automatically, handy for ids.", aliases: &["serial4"] },
    Entry { name: "bigserial", category: TypeCategory::Serial, tooltip: "Auto-incrementing bigint for tables that may outgrow the serial range.", aliases: &["serial8"] },
    Entry { name: "real", category: TypeCategory::Numeric, tooltip: "Floating-point number with about 6 digits of precision; values are approximate.", aliases: &["float4"] },
    Entry { name: "double precision", category: TypeCategory::Numeric, tooltip: "Floating-point number with about 15 digits of precision; values are approximate.", aliases: &["float8", "float"] },
    Entry { name: "numeric", category: TypeCategory::Numeric, tooltip: "Exact decimal number with chosen precision, suited to money and measurements.", aliases: &["decimal"] },
    Entry { name: "text", category: TypeCategory::Character, tooltip: "Text of any length.", aliases: &[] },
    Entry { name: "varchar", category: TypeCategory::Character, tooltip: "Text up to a maximum length, for example varchar(50).", aliases: &["character varying"] },
    Entry { name: "char", category: TypeCategory::Character, tooltip: "Fixed-length text padded with spaces, for example char(2) for country codes.", aliases: &["character"] },
    Entry { name: "boolean", category: TypeCategory::Boolean, tooltip: "True or false value.", aliases: &["bool"] },
    Entry { name: "date", category: TypeCategory::Temporal, tooltip: "Calendar date without a time of day.", aliases: &[] },
    Entry { name: "time", category: TypeCategory::Temporal, tooltip: "Time of day without a date.", aliases: &[] },
    Entry { name: "timestamp", category: TypeCategory::Temporal, tooltip: "Date and time of day together.", aliases: &[] },
    Entry { name: "bytea", category: TypeCategory::Binary, tooltip: "Raw binary data such as images or files.", aliases: &[] },
    Entry { name: "smallserial", category: TypeCategory::Serial, tooltip: "Auto-incrementing smallint for small lookup tables.", aliases: &["serial2"] },
    Entry { name: "timestamptz", category: TypeCategory::Temporal, tooltip: "Date and time that records the time zone, so instants compare correctly worldwide.", aliases: &[] },
    Entry { name: "interval", category: TypeCategory::Temporal, tooltip: "Length of time, such as 3 days or 2 hours.", aliases: &[] },
    Entry { name: "uuid", category: TypeCategory::Other, tooltip: "Universally unique identifier, a 128-bit value usually written in hex.", aliases: &[] },
    Entry { name: "json", category: TypeCategory::Other, tooltip: "JSON document stored as text.", aliases: &[] },
    Entry { name: "jsonb", category: TypeCategory::Other, tooltip: "JSON document stored in a binary form that can be indexed and searched.", aliases: &[] },
];

fn to_descriptor(e: &Entry) -> DataTypeDescriptor {
    DataTypeDescriptor { name: e.name.to_string(), category: e.category, tooltip: e.tooltip.to_string() }
}

fn lookup(base: &str) -> Option<&'static Entry> {
    REGISTRY.iter().find(|e| e.name == base || e.aliases.contains(&base))
}

/// All registered types in registry order.
pub fn registered_types() -> Vec<DataTypeDescriptor> {
    REGISTRY.iter().map(to_descriptor).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("“{name}” is not a known data type. Did you mean “{suggestion}”?")]
pub struct UnknownDataType {
    pub name: String,
    pub suggestion: String,
}

pub fn describe_data_type(name: &DataTypeName) -> Result<DataTypeDescriptor, UnknownDataType> {
    let base = name.base();
    lookup(&base).map(to_descriptor).ok_or_else(|| UnknownDataType { name: name.0.clone(), suggestion: nearest_type_name(&base) })
}

pub fn is_registered(name: &DataTypeName) -> bool {
    lookup(&name.base()).is_some()
}

/// Closest registered name by edit distance. Multi-word names are also
/// compared word by word so `dubble` lands on `double precision`. Ties keep
/// registry order.
pub fn nearest_type_name(input: &str) -> String {
    let input = input.to_ascii_lowercase();
    let score = |name: &str| {
        let whole = strsim::levenshtein(&input, name);
        let words = name.split(' ').map(|w| strsim::levenshtein(&input, w)).min().unwrap_or(whole);
        whole.min(words)
    };
    REGISTRY
        .iter()
        .map(|e| (score(e.name), e.name))
        .min_by_key(|(s, _)| *s)
        .map(|(_, n)| n.to_string())
        .expect("registry is non-empty")
}

pub fn category_of(name: &DataTypeName) -> Option<TypeCategory> {
    lookup(&name.base()).map(|e| e.category)
}
