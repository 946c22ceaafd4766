//! Seeded random databases and bag-equivalence checking.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::value::{MiniDb, Relation, Row, Value};
use super::{eval, EvalError};
use crate::catalog::{ColumnDef, ConstraintKind, SchemaCatalog, TypeCategory};
use crate::sql::SelectAst;

pub const MAX_ROWS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    Int,
    Decimal,
    Text,
    Bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenColumn {
    pub name: String,
    pub kind: GenKind,
    pub nullable: bool,
    pub unique: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenTable {
    pub name: String,
    pub columns: Vec<GenColumn>,
}

/// Shapes of the tables a random database contains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct GenSchema {
    pub tables: Vec<GenTable>,
}

fn kind_of(col: &ColumnDef) -> GenKind {
    match crate::catalog::category_of(&col.data_type) {
        Some(TypeCategory::Numeric) => match col.data_type.base().as_str() {
            "real" | "double precision" | "float4" | "float8" | "float" => GenKind::Decimal,
            _ => GenKind::Int,
        },
        Some(TypeCategory::Serial) => GenKind::Int,
        Some(TypeCategory::Boolean) => GenKind::Bool,
        _ => GenKind::Text,
    }
}

impl GenSchema {
    /// One generated table per catalog table, keyed by display name, honoring
    /// NOT NULL and single-column UNIQUE.
    pub fn from_catalog(catalog: &SchemaCatalog) -> Self {
        let tables = catalog
            .tables
            .values()
            .map(|t| GenTable {
                name: t.display_name(),
                columns: t
                    .columns
                    .iter()
                    .map(|c| GenColumn {
                        name: c.name.clone(),
                        kind: kind_of(c),
                        nullable: !c.has(ConstraintKind::NotNull),
                        unique: t.has_unique_constraint(&c.name) || t.indexes.iter().any(|i| i.unique && i.columns.len() == 1 && i.columns[0].name == c.name),
                    })
                    .collect(),
            })
            .collect();
        GenSchema { tables }
    }

    /// Nullable, non-unique integer columns.
    pub fn ints(tables: &[(&str, &[&str])]) -> Self {
        GenSchema {
            tables: tables
                .iter()
                .map(|(name, cols)| GenTable {
                    name: name.to_string(),
                    columns: cols.iter().map(|c| GenColumn { name: c.to_string(), kind: GenKind::Int, nullable: true, unique: false }).collect(),
                })
                .collect(),
        }
    }
}

const TEXTS: [&str; 5] = ["a", "b", "c", "College", "x"];

fn small_value(rng: &mut ChaCha8Rng, col: &GenColumn) -> Value {
    if col.nullable && rng.random_bool(0.15) {
        return Value::Null;
    }
    match col.kind {
        GenKind::Int => Value::Int(rng.random_range(-2..=4)),
        GenKind::Decimal => Value::decimal(f64::from(rng.random_range(-4..=8_i32)) / 2.0),
        GenKind::Text => Value::text(TEXTS[rng.random_range(0..TEXTS.len())]),
        GenKind::Bool => Value::Bool(rng.random_bool(0.5)),
    }
}

fn unique_values(rng: &mut ChaCha8Rng, col: &GenColumn, n: usize) -> Vec<Value> {
    let mut pool: Vec<i64> = (0..(MAX_ROWS as i64 * 2)).map(|i| i - 5).collect();
    pool.shuffle(rng);
    pool.into_iter()
        .take(n)
        .map(|i| match col.kind {
            GenKind::Int => Value::Int(i),
            GenKind::Decimal => Value::decimal(i as f64 / 2.0),
            GenKind::Text => Value::Text(format!("k{i}")),
            GenKind::Bool => Value::Bool(i % 2 == 0),
        })
        .collect()
}

/// Generation mode for one trial: 0 empty, 1 duplicate-heavy, else random.
fn gen_table(rng: &mut ChaCha8Rng, t: &GenTable, mode: u64) -> Relation {
    let has_unique = t.columns.iter().any(|c| c.unique);
    let mut n = match mode {
        0 => 0,
        _ => rng.random_range(0..=MAX_ROWS),
    };
    if has_unique && t.columns.iter().any(|c| c.unique && c.kind == GenKind::Bool) {
        n = n.min(2);
    }
    let uniques: Vec<Option<Vec<Value>>> = t.columns.iter().map(|c| c.unique.then(|| unique_values(rng, c, n))).collect();
    let template: Row = t.columns.iter().map(|c| small_value(rng, c)).collect();
    let rows = (0..n)
        .map(|i| {
            t.columns
                .iter()
                .enumerate()
                .map(|(j, c)| match &uniques[j] {
                    Some(u) => u[i].clone(),
                    None if mode == 1 => template[j].clone(),
                    None => small_value(rng, c),
                })
                .collect()
        })
        .collect();
    Relation { columns: t.columns.iter().map(|c| c.name.clone()).collect(), rows }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// The database used for trial `trial`. Trials with `trial % 5 == 0` leave
/// every table empty and `trial % 5 == 1` fills tables with copies of one row.
pub fn random_db(schema: &GenSchema, seed: u64, trial: u64) -> MiniDb {
    let mut rng = trial_rng(seed, trial);
    let mode = match trial % 5 {
        0 => 0,
        1 => 1,
        _ => 2,
    };
    let mut db = MiniDb::new();
    for t in &schema.tables {
        db.tables.insert(t.name.clone(), gen_table(&mut rng, t, mode));
    }
    db
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Equivalent { trials: u64 },
    Counterexample { trial: u64, db: MiniDb, left: Relation, right: Relation },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }
}

/// Compares `a` and `b` as bags over `trials` seeded random databases and
/// returns the first database on which they differ.
pub fn assert_equivalent(a: &SelectAst, b: &SelectAst, schema: &GenSchema, seed: u64, trials: u64) -> Result<Verdict, EvalError> {
    for trial in 0..trials {
        let db = random_db(schema, seed, trial);
        let left = eval(a, &db)?;
        let right = eval(b, &db)?;
        if !left.bag_eq(&right) {
            return Ok(Verdict::Counterexample { trial, db, left, right });
        }
    }
    Ok(Verdict::Equivalent { trials })
}
