use super::ast::*;

/// Canonical form used for AST comparison. AND/OR chains are left-associated,
/// a minus in front of a numeric literal is folded into it and aggregate
/// names are upper-cased. Idempotent.
pub fn normalize(ast: &SelectAst) -> SelectAst {
    let mut out = ast.clone();
    normalize_in_place(&mut out);
    out
}

fn normalize_in_place(ast: &mut SelectAst) {
    for item in &mut ast.select_list {
        if let SelectItem::Expr { expr, .. } = item {
            *expr = normalize_expr(expr);
        }
    }
    for tr in &mut ast.from {
        normalize_factor(&mut tr.factor);
        for j in &mut tr.joins {
            normalize_factor(&mut j.factor);
            j.on = normalize_expr(&j.on);
        }
    }
    if let Some(w) = &mut ast.where_clause {
        *w = normalize_expr(w);
    }
    for g in &mut ast.group_by {
        *g = normalize_expr(g);
    }
    if let Some(h) = &mut ast.having {
        *h = normalize_expr(h);
    }
    for o in &mut ast.order_by {
        o.expr = normalize_expr(&o.expr);
    }
    if let Some(op) = &mut ast.set_op {
        normalize_in_place(&mut op.right);
    }
}

fn normalize_factor(f: &mut TableFactor) {
    if let TableFactor::Derived { subquery, .. } = f {
        normalize_in_place(subquery);
    }
}

pub fn normalize_expr(e: &Expr) -> Expr {
    match e {
        Expr::Binary { op: op @ (BinaryOp::And | BinaryOp::Or), .. } => {
            let mut parts = Vec::new();
            flatten(e, *op, &mut parts);
            parts
                .into_iter()
                .map(normalize_expr)
                .reduce(|l, r| Expr::binary(*op, l, r))
                .expect("a chain has operands")
        }
        Expr::Binary { op, lhs, rhs } => Expr::binary(*op, normalize_expr(lhs), normalize_expr(rhs)),
        Expr::Unary { op: UnaryOp::Neg, operand } => match normalize_expr(operand) {
            Expr::Literal { value: Literal::Integer(v) } if v.checked_neg().is_some() => Expr::int(-v),
            Expr::Literal { value: Literal::Decimal(d) } => Expr::Literal {
                value: Literal::Decimal(match d.strip_prefix('-') {
                    Some(pos) => pos.to_string(),
                    None => format!("-{d}"),
                }),
            },
            other => Expr::Unary { op: UnaryOp::Neg, operand: Box::new(other) },
        },
        Expr::Unary { op, operand } => Expr::Unary { op: *op, operand: Box::new(normalize_expr(operand)) },
        Expr::IsNull { operand, negated } => Expr::IsNull { operand: Box::new(normalize_expr(operand)), negated: *negated },
        Expr::Function { name, args } => Expr::Function {
            name: if is_aggregate_name(name) { name.to_ascii_uppercase() } else { name.clone() },
            args: match args {
                FunctionArgs::Star => FunctionArgs::Star,
                FunctionArgs::List(a) => FunctionArgs::List(a.iter().map(normalize_expr).collect()),
            },
        },
        Expr::Row { items } => Expr::Row { items: items.iter().map(normalize_expr).collect() },
        Expr::Subquery { query } => Expr::Subquery { query: Box::new(normalize(query)) },
        Expr::Column(_) | Expr::Literal { .. } => e.clone(),
    }
}

fn flatten<'a>(e: &'a Expr, op: BinaryOp, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Binary { op: o, lhs, rhs } if *o == op => {
            flatten(lhs, op, out);
            flatten(rhs, op, out);
        }
        other => out.push(other),
    }
}
