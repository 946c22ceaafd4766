//! The six detectors. Each works on one query block of a set-operation chain
//! and proposes a whole-query rewrite.

use super::{Equivalence, Rule};
use crate::catalog::{SchemaCatalog, TableDef};
use crate::sql::{render_expr, BinaryOp, Clause, Expr, SelectAst, SelectItem, SetOpKind, SourceMap, Span, TableFactor};

pub(super) struct Finding {
    pub rule: Rule,
    pub span: Span,
    pub message: String,
    pub rewrite: Option<SelectAst>,
    pub equivalence: Equivalence,
}

pub(super) fn detect(ast: &SelectAst, map: &SourceMap, catalog: &SchemaCatalog) -> Vec<Finding> {
    let mut out = Vec::new();
    let branches = ast.branches();
    for (i, (_, block)) in branches.iter().enumerate() {
        // Later branches have no clause spans of their own; point at the
        // set operator that introduces them.
        let span = |c: Clause| if i == 0 { map.clause(c) } else { map.set_ops.get(i - 1).copied().unwrap_or_default() };
        out.extend(star_expansion(ast, i, block, catalog, span(Clause::Select)));
        out.extend(having_to_where(ast, i, block, span(Clause::Having)));
        out.extend(redundant_distinct(ast, i, block, catalog, span(Clause::Select)));
        out.extend(subquery_fusion(ast, i, block, span(Clause::Where)));
    }
    out.extend(count_star(ast, map.clause(Clause::Select)));
    for (i, (kind, _)) in branches.iter().enumerate().skip(1) {
        if *kind == Some(SetOpKind::Union) {
            let span = map.set_ops.get(i - 1).copied().unwrap_or_default();
            out.push(union_all(ast, i - 1, span));
        }
    }
    out
}

/// Copy of `ast` with block `index` of the chain changed by `f`.
fn with_block(ast: &SelectAst, index: usize, f: impl FnOnce(&mut SelectAst)) -> SelectAst {
    let mut out = ast.clone();
    let mut cur = &mut out;
    for _ in 0..index {
        cur = &mut cur.set_op.as_mut().expect("block index within chain").right;
    }
    f(cur);
    out
}

fn single_table<'a>(block: &SelectAst, catalog: &'a SchemaCatalog) -> Option<(&'a TableDef, String)> {
    let [tr] = block.from.as_slice() else { return None };
    if !tr.joins.is_empty() {
        return None;
    }
    match &tr.factor {
        TableFactor::Table { name, .. } => catalog.resolve_table(&name.key()).map(|t| (t, tr.factor.binding_name().to_string())),
        TableFactor::Derived { .. } => None,
    }
}

fn star_expansion(ast: &SelectAst, i: usize, block: &SelectAst, catalog: &SchemaCatalog, span: Span) -> Option<Finding> {
    if !block.has_star() {
        return None;
    }
    let factors: Vec<&TableFactor> = block.from.iter().flat_map(|tr| std::iter::once(&tr.factor).chain(tr.joins.iter().map(|j| &j.factor))).collect();
    let qualify = factors.len() > 1;
    let mut expansion = Vec::new();
    let mut missing = None;
    for f in &factors {
        let table = match f {
            TableFactor::Table { name, .. } => catalog.resolve_table(&name.key()),
            TableFactor::Derived { .. } => None,
        };
        let Some(table) = table else {
            missing = Some(f.binding_name().to_string());
            break;
        };
        for c in &table.columns {
            let e = if qualify { Expr::qualified(f.binding_name(), &c.name) } else { Expr::column(&c.name) };
            expansion.push(SelectItem::expr(e));
        }
    }
    let base = "SELECT * fetches every column, including ones the query may not need, and the result changes shape whenever the table does.";
    if let Some(t) = missing {
        return Some(Finding {
            rule: Rule::A_STAR_EXPANSION,
            span,
            message: format!("{base} The columns of {t} are not known here, so list the ones you need by hand."),
            rewrite: None,
            equivalence: Equivalence::Preserving,
        });
    }
    let named: Vec<String> = expansion.iter().filter_map(|i| i.expr_ref()).map(render_expr).collect();
    let rewrite = with_block(ast, i, |b| {
        b.select_list = b
            .select_list
            .iter()
            .flat_map(|item| match item {
                SelectItem::Wildcard => expansion.clone(),
                other => vec![other.clone()],
            })
            .collect();
    });
    Some(Finding {
        rule: Rule::A_STAR_EXPANSION,
        span,
        message: format!("{base} Name the columns instead: {}.", named.join(", ")),
        rewrite: Some(rewrite),
        equivalence: Equivalence::Preserving,
    })
}

/// A HAVING conjunct can move to WHERE when its value is fixed within each
/// group: no aggregate, no subquery, and only grouping columns.
fn movable(conjunct: &Expr, group_by: &[Expr]) -> bool {
    !conjunct.contains_aggregate()
        && !conjunct.contains_subquery()
        && conjunct.columns().into_iter().all(|c| group_by.iter().any(|g| matches!(g, Expr::Column(gc) if gc == c)))
}

fn having_to_where(ast: &SelectAst, i: usize, block: &SelectAst, span: Span) -> Option<Finding> {
    let having = block.having.as_ref()?;
    if block.group_by.is_empty() {
        return None;
    }
    let (moved, kept): (Vec<&Expr>, Vec<&Expr>) = having.conjuncts().into_iter().partition(|c| movable(c, &block.group_by));
    if moved.is_empty() {
        return None;
    }
    let text: Vec<String> = moved.iter().map(|e| render_expr(e)).collect();
    let rewrite = with_block(ast, i, |b| {
        let existing = b.where_clause.take().map(|w| w.conjuncts().into_iter().cloned().collect::<Vec<_>>()).unwrap_or_default();
        b.where_clause = Expr::conjoin(existing.into_iter().chain(moved.iter().map(|e| (*e).clone())));
        b.having = Expr::conjoin(kept.into_iter().cloned());
    });
    Some(Finding {
        rule: Rule::B_HAVING_TO_WHERE,
        span,
        message: format!(
            "HAVING filters groups after every row has been selected and grouped. The condition {} uses only grouping columns, so WHERE can drop those rows before grouping.",
            text.join(" AND ")
        ),
        rewrite: Some(rewrite),
        equivalence: Equivalence::Preserving,
    })
}

fn redundant_distinct(ast: &SelectAst, i: usize, block: &SelectAst, catalog: &SchemaCatalog, span: Span) -> Option<Finding> {
    if !block.distinct {
        return None;
    }
    let base = "DISTINCT makes the database sort or hash the whole result to remove duplicates; use it only when duplicates can really occur.";
    let key = (!block.is_grouped()).then(|| single_table(block, catalog)).flatten().and_then(|(table, binding)| {
        block.select_list.iter().find_map(|item| match item {
            SelectItem::Wildcard => table.columns.iter().find(|c| table.is_unique_not_null(&c.name)).map(|c| c.name.clone()),
            SelectItem::Expr { expr: Expr::Column(c), .. } if c.qualifier.as_deref().is_none_or(|q| q == binding) && table.is_unique_not_null(&c.name) => {
                Some(c.name.clone())
            }
            _ => None,
        })
    });
    Some(match key {
        Some(col) => Finding {
            rule: Rule::C_REDUNDANT_DISTINCT,
            span,
            message: format!("{base} Here {col} is UNIQUE and NOT NULL, so every row is already distinct and DISTINCT can go."),
            rewrite: Some(with_block(ast, i, |b| b.distinct = false)),
            equivalence: Equivalence::Preserving,
        },
        None => Finding {
            rule: Rule::C_REDUNDANT_DISTINCT,
            span,
            message: format!("{base} No selected column is known to be UNIQUE and NOT NULL, so removing it could change the result."),
            rewrite: None,
            equivalence: Equivalence::AlteringNeedsConfirmation,
        },
    })
}

fn count_star(ast: &SelectAst, span: Span) -> Option<Finding> {
    let [SelectItem::Expr { expr, .. }] = ast.select_list.as_slice() else { return None };
    let [tr] = ast.from.as_slice() else { return None };
    let TableFactor::Table { name, .. } = &tr.factor else { return None };
    let plain = *expr == Expr::count_star()
        && !ast.distinct
        && ast.where_clause.is_none()
        && ast.group_by.is_empty()
        && ast.having.is_none()
        && ast.set_op.is_none()
        && tr.joins.is_empty();
    plain.then(|| Finding {
        rule: Rule::D_COUNT_STAR_ALTERNATIVE,
        span,
        message: format!(
            "COUNT(*) reads the whole table, which can take a long time on large tables. When an estimate is enough, read the planner statistics instead: SELECT reltuples FROM pg_class WHERE relname = '{}';",
            name.name.replace('\'', "''")
        ),
        rewrite: None,
        equivalence: Equivalence::Approximate,
    })
}

/// `lhs = (SELECT agg, ... FROM ...)` with one aggregate per compared value.
fn fusion_candidate(e: &Expr) -> Option<(Vec<Expr>, &SelectAst)> {
    let Expr::Binary { op: BinaryOp::Eq, lhs, rhs } = e else { return None };
    let Expr::Subquery { query } = rhs.as_ref() else { return None };
    if lhs.contains_subquery() {
        return None;
    }
    let q = query.as_ref();
    let simple = q.set_op.is_none() && !q.distinct && q.group_by.is_empty() && q.having.is_none() && q.order_by.is_empty();
    let aggregates = q.select_list.iter().all(|i| i.expr_ref().is_some_and(Expr::is_aggregate_call));
    let left = match lhs.as_ref() {
        Expr::Row { items } => items.clone(),
        other => vec![other.clone()],
    };
    (simple && aggregates && left.len() == q.select_list.len()).then_some((left, q))
}

fn subquery_fusion(ast: &SelectAst, i: usize, block: &SelectAst, span: Span) -> Option<Finding> {
    let where_clause = block.where_clause.as_ref()?;
    let conjuncts = where_clause.conjuncts();
    let candidates: Vec<Option<(Vec<Expr>, &SelectAst)>> = conjuncts.iter().map(|c| fusion_candidate(c)).collect();
    // Groups of conjunct positions whose subqueries read the same rows.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (pos, cand) in candidates.iter().enumerate() {
        let Some((_, q)) = cand else { continue };
        let same = |g: &Vec<usize>| {
            let (_, first) = candidates[g[0]].as_ref().expect("grouped positions are candidates");
            first.from == q.from && first.where_clause == q.where_clause
        };
        match groups.iter_mut().find(|g| same(g)) {
            Some(g) => g.push(pos),
            None => groups.push(vec![pos]),
        }
    }
    groups.retain(|g| g.len() > 1);
    if groups.is_empty() {
        return None;
    }
    let mut fused: Vec<Option<Expr>> = conjuncts.iter().map(|c| Some((*c).clone())).collect();
    for g in &groups {
        let mut left = Vec::new();
        let (_, first) = candidates[g[0]].as_ref().expect("grouped positions are candidates");
        let mut sub = (*first).clone();
        sub.select_list.clear();
        for &pos in g {
            let (l, q) = candidates[pos].as_ref().expect("grouped positions are candidates");
            left.extend(l.iter().cloned());
            sub.select_list.extend(q.select_list.iter().cloned());
            fused[pos] = None;
        }
        fused[g[0]] = Some(Expr::binary(BinaryOp::Eq, Expr::Row { items: left }, Expr::subquery(sub)));
    }
    let rewrite = with_block(ast, i, |b| b.where_clause = Expr::conjoin(fused.into_iter().flatten()));
    let count: usize = groups.iter().map(Vec::len).sum();
    Some(Finding {
        rule: Rule::E_SUBQUERY_FUSION,
        span,
        message: format!(
            "{count} subqueries read the same rows; each one is a separate subquery block to run. Fetch their values together in one subquery to reduce the number of blocks."
        ),
        rewrite: Some(rewrite),
        equivalence: Equivalence::Preserving,
    })
}

fn union_all(ast: &SelectAst, op_index: usize, span: Span) -> Finding {
    let rewrite = with_block(ast, op_index, |b| b.set_op.as_mut().expect("operator within chain").kind = SetOpKind::UnionAll);
    Finding {
        rule: Rule::F_UNION_TO_UNION_ALL,
        span,
        message: "UNION sorts or hashes the combined rows to remove duplicates. The UNION ALL statement does not consider duplicates, so it is faster, but it keeps rows that appear in both branches; use it when the branches cannot overlap or duplicates are acceptable.".to_string(),
        rewrite: Some(rewrite),
        equivalence: Equivalence::AlteringNeedsConfirmation,
    }
}
