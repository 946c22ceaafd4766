//! Workloads shared by the benchmarks.

use pgstudio_core::catalog::{ColumnDef, SchemaCatalog, TableDef};

/// One table `wide` with `columns` integer columns `c0..`.
pub fn wide_catalog(columns: usize) -> SchemaCatalog {
    let mut cat = SchemaCatalog::new();
    let cols = (0..columns).map(|i| ColumnDef::new(&format!("c{i}"), "integer")).collect();
    cat.add_table(TableDef::new("public", "wide", cols)).expect("valid table");
    cat
}

/// A filter on `wide` with `predicates` conjuncts, alternating `=` and `>`.
pub fn conjunctive_query(predicates: usize) -> String {
    let preds: Vec<String> = (0..predicates).map(|i| if i % 2 == 0 { format!("c{i} = {i}") } else { format!("c{i} > {i}") }).collect();
    let filter = if preds.is_empty() { String::new() } else { format!(" WHERE {}", preds.join(" AND ")) };
    format!("SELECT c0 FROM wide{filter};")
}

/// A UNION of `branches` filtered selects on `wide`.
pub fn union_query(branches: usize) -> String {
    let parts: Vec<String> = (0..branches.max(1)).map(|i| format!("SELECT c0, c1 FROM wide WHERE c0 > {i} ORDER BY c1")).collect();
    let mut q = parts.join(" UNION ");
    // ORDER BY may only close the last branch.
    q = q.replacen(" ORDER BY c1 UNION", " UNION", branches.saturating_sub(1));
    format!("{q};")
}

#[cfg(test)]
mod tests {
    use super::*;
    use pgstudio_core::sql::parse_select;

    #[test]
    fn workloads_parse() {
        let _ = wide_catalog(8);
        for n in [0, 1, 5] {
            parse_select(&conjunctive_query(n)).unwrap();
            parse_select(&union_query(n)).unwrap();
        }
    }
}
