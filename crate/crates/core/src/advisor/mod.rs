//! Optimization tips for a query: six detect-and-rewrite rules with an
//! equivalence class per suggestion, plus a teaching cost model.

mod plan;
mod rules;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog::SchemaCatalog;
use crate::sql::{normalize, parse_select_with_map, render_select, ParseError, SelectAst, SourceMap, Span};

pub use plan::{compare_plans, plan, plan_with, Alternative, CostModel, PlanError, PlanNode, PlanOperator, PlanReport, TableStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum Rule {
    A_STAR_EXPANSION,
    B_HAVING_TO_WHERE,
    C_REDUNDANT_DISTINCT,
    D_COUNT_STAR_ALTERNATIVE,
    E_SUBQUERY_FUSION,
    F_UNION_TO_UNION_ALL,
}

impl Rule {
    pub const ALL: [Rule; 6] = [
        Rule::A_STAR_EXPANSION,
        Rule::B_HAVING_TO_WHERE,
        Rule::C_REDUNDANT_DISTINCT,
        Rule::D_COUNT_STAR_ALTERNATIVE,
        Rule::E_SUBQUERY_FUSION,
        Rule::F_UNION_TO_UNION_ALL,
    ];

    pub fn title(self) -> &'static str {
        match self {
            Rule::A_STAR_EXPANSION => "Name the columns instead of *",
            Rule::B_HAVING_TO_WHERE => "Filter rows in WHERE, not HAVING",
            Rule::C_REDUNDANT_DISTINCT => "Avoid unnecessary DISTINCT",
            Rule::D_COUNT_STAR_ALTERNATIVE => "COUNT(*) scans the whole table",
            Rule::E_SUBQUERY_FUSION => "Fuse subqueries over the same rows",
            Rule::F_UNION_TO_UNION_ALL => "UNION ALL skips duplicate removal",
        }
    }
}

/// Whether applying a rewrite keeps the query's result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equivalence {
    Preserving,
    AlteringNeedsConfirmation,
    Approximate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub rule: Rule,
    pub span: Span,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewrite: Option<SelectAst>,
    /// Canonical text of `rewrite`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewrite_sql: Option<String>,
    pub equivalence: Equivalence,
    /// Fingerprint of the analyzed query; ties the rewrite to it.
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum AdvisorError {
    #[error("the query changed after this tip was produced; analyze it again")]
    StaleDiagnostic,
    #[error("this tip has no automatic rewrite; change the query by hand")]
    NoRewrite { rule: Rule },
}

/// Hex sha256 of the normalized query tree.
pub fn fingerprint(ast: &SelectAst) -> String {
    let json = serde_json::to_vec(&normalize(ast)).expect("query trees serialize");
    hex::encode(Sha256::digest(&json))
}

/// Runs every rule over `ast`; spans refer to its canonical rendering.
pub fn analyze(ast: &SelectAst, catalog: &SchemaCatalog) -> Vec<Diagnostic> {
    let map = render_select(ast).map(|c| c.source_map()).unwrap_or_default();
    analyze_mapped(ast, &map, catalog)
}

/// Parses `text` and runs every rule; spans refer to `text`.
pub fn analyze_source(text: &str, catalog: &SchemaCatalog) -> Result<(SelectAst, Vec<Diagnostic>), ParseError> {
    let (ast, map) = parse_select_with_map(text)?;
    let diags = analyze_mapped(&ast, &map, catalog);
    Ok((ast, diags))
}

fn analyze_mapped(ast: &SelectAst, map: &SourceMap, catalog: &SchemaCatalog) -> Vec<Diagnostic> {
    let fp = fingerprint(ast);
    let mut out: Vec<Diagnostic> = rules::detect(ast, map, catalog)
        .into_iter()
        .map(|f| {
            let (rewrite, rewrite_sql) = match f.rewrite {
                Some(r) => match render_select(&r) {
                    Ok(c) => (Some(r), Some(c.text)),
                    Err(_) => (None, None),
                },
                None => (None, None),
            };
            Diagnostic { rule: f.rule, span: f.span, message: f.message, rewrite, rewrite_sql, equivalence: f.equivalence, fingerprint: fp.clone() }
        })
        .collect();
    out.sort_by_key(|d| (d.span.start, d.span.end, d.rule));
    out
}

/// Returns the rewrite carried by `diagnostic` if it was produced from `ast`.
pub fn apply_rewrite(ast: &SelectAst, diagnostic: &Diagnostic) -> Result<SelectAst, AdvisorError> {
    if fingerprint(ast) != diagnostic.fingerprint {
        return Err(AdvisorError::StaleDiagnostic);
    }
    diagnostic.rewrite.clone().ok_or(AdvisorError::NoRewrite { rule: diagnostic.rule })
}
