//! One handler per route. Each wraps a single engine operation and answers
//! with the response envelope.

use std::sync::Arc;

use axum::extract::State;
use axum::http::HeaderMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use pgstudio_core::advisor::{analyze_source, apply_rewrite, compare_plans, plan, Equivalence, Rule, TableStats};
use pgstudio_core::catalog::{
    describe_data_type, registered_types, render_create_database, render_create_index, render_create_schema, render_create_table, render_create_trigger, unique_option_hint,
    validate_database, validate_identifier, validate_index, validate_table, validate_trigger, DataTypeName, DatabaseDef, IndexDef, IndexMethod, TableDef, TriggerDef,
};
use pgstudio_core::completion::{complete, generate_from_pseudocode, parse_pseudocode};
use pgstudio_core::eval::{eval, MiniDb};
use pgstudio_core::graph::{graph_to_ast_in, property_schema_in, validate_graph_in, ElementId, ElementKind, GraphContext, PropertyValue, QueryGraph};
use pgstudio_core::sql::{parse_select, render_select, tokenize, SelectAst};
use pgstudio_core::workspace::{load_project, save_project, Mutation, NewUser, Project, WorkspaceError};

use crate::context::context_actions;
use crate::response::{parse_error, ApiError, ApiResult, Body, Params, Reply, Segments};
use crate::routes::{api_reference, ROUTES};
use crate::state::{AppState, Applied, ProjectSummary, User};

type St = State<Arc<AppState>>;

fn recorded<T: Serialize>(a: Applied<T>) -> Reply {
    let payload = json!({
        "entry": { "sequence": a.entry.sequence, "timestamp": a.entry.timestamp, "human_label": a.entry.human_label },
        "project": a.summary,
        "result": a.value,
    });
    Reply::new(format!("{}.", a.entry.human_label), payload)
}

fn plural(n: usize, one: &str, many: &str) -> String {
    format!("{n} {}", if n == 1 { one } else { many })
}

fn parse(sql: &str) -> Result<SelectAst, ApiError> {
    parse_select(sql).map_err(|e| parse_error(&e, sql))
}

fn graph<'a>(p: &'a Project, name: &str) -> Result<&'a QueryGraph, ApiError> {
    p.graphs.get(name).ok_or_else(|| WorkspaceError::UnknownGraph { name: name.to_string() }.into())
}

// ---- service ----

pub async fn health() -> ApiResult {
    Ok(Reply::new("The service is running.", json!({ "routes": ROUTES.len() })))
}

pub async fn reference() -> ApiResult {
    Ok(Reply::new(format!("{} endpoints are available.", ROUTES.len()), json!({ "routes": ROUTES, "text": api_reference() })))
}

// ---- auth ----

pub async fn register(State(s): St, Body(new): Body<NewUser>) -> ApiResult {
    let profile = s.register(new).await?;
    Ok(Reply::new(format!("Account {} created; sign in to start.", profile.username), json!(profile)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Credentials {
    username: String,
    password: String,
}

pub async fn login(State(s): St, Body(c): Body<Credentials>) -> ApiResult {
    let session = s.login(&c.username, &c.password)?;
    Ok(Reply::new(format!("Signed in as {}.", session.username), json!(session)))
}

pub async fn logout(State(s): St, User(name): User, headers: HeaderMap) -> ApiResult {
    if let Some(token) = headers.get("authorization").and_then(|v| v.to_str().ok()).and_then(|v| v.strip_prefix("Bearer ")) {
        s.logout(token.trim());
    }
    Ok(Reply::new(format!("Signed out {name}."), Value::Null))
}

// ---- reference data ----

pub async fn types_list(_: User) -> ApiResult {
    let types = registered_types();
    Ok(Reply::new(format!("{} data types are available.", types.len()), json!(types)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NameBody {
    name: String,
}

pub async fn types_describe(_: User, Body(b): Body<NameBody>) -> ApiResult {
    let d = describe_data_type(&DataTypeName::new(&b.name))?;
    Ok(Reply::new(format!("{}: {}", d.name, d.tooltip), json!(d)))
}

#[derive(Deserialize)]
pub struct KindQuery {
    kind: String,
}

pub async fn objects_context_actions(_: User, Params(q): Params<KindQuery>) -> ApiResult {
    let actions = context_actions(&q.kind).map_err(|e| ApiError::unprocessable(e.to_string()).with_payload(&e))?;
    Ok(Reply::new(format!("{} for a {}.", plural(actions.len(), "action", "actions"), q.kind.to_ascii_lowercase()), json!(actions)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodBody {
    method: IndexMethod,
}

pub async fn ddl_index_options(_: User, Body(b): Body<MethodBody>) -> ApiResult {
    let hint = unique_option_hint(b.method);
    let feedback = hint.hint.clone().unwrap_or_else(|| format!("{} indexes can be unique.", b.method.sql()));
    Ok(Reply::new(feedback, json!(hint)))
}

// ---- stateless SQL ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqlBody {
    sql: String,
}

pub async fn sql_parse(_: User, Body(b): Body<SqlBody>) -> ApiResult {
    let ast = parse(&b.sql)?;
    let canonical = render_select(&ast)?;
    let tokens = tokenize(&b.sql).ok();
    Ok(Reply::new("The query is valid.", json!({ "ast": ast, "canonical": canonical, "tokens": tokens })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AstBody {
    ast: SelectAst,
}

pub async fn sql_render(_: User, Body(b): Body<AstBody>) -> ApiResult {
    let canonical = render_select(&b.ast)?;
    Ok(Reply::new(format!("Rendered: {}", canonical.text), json!(canonical)))
}

// ---- projects ----

pub async fn projects_list(State(s): St, User(user): User) -> ApiResult {
    let mut out = Vec::new();
    for p in s.list_projects(&user) {
        out.push(ProjectSummary::of(&*p.read().await));
    }
    Ok(Reply::new(format!("You have {}.", plural(out.len(), "project", "projects")), json!(out)))
}

pub async fn projects_create(State(s): St, User(user): User, Body(b): Body<NameBody>) -> ApiResult {
    if b.name.trim().is_empty() {
        return Err(WorkspaceError::EmptyName.into());
    }
    let p = Project::new(&uuid::Uuid::new_v4().to_string(), &user, b.name.trim());
    let summary = s.insert_project(p).await?;
    Ok(Reply::new(format!("Project {} created.", summary.name), json!(summary)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImportBody {
    document: Value,
}

/// Imports a project file as a new project owned by the caller.
pub async fn projects_import(State(s): St, User(user): User, Body(b): Body<ImportBody>) -> ApiResult {
    let text = match &b.document {
        Value::String(t) => t.clone(),
        v => v.to_string(),
    };
    let mut p = load_project(&text)?;
    p.owner = user;
    p.id = uuid::Uuid::new_v4().to_string();
    let summary = s.insert_project(p).await?;
    Ok(Reply::new(format!("Project {} imported.", summary.name), json!(summary)))
}

pub async fn project_get(State(s): St, User(user): User, Segments(id): Segments<String>) -> ApiResult {
    let summary = s.read(&user, &id, |p| Ok(ProjectSummary::of(p))).await?;
    Ok(Reply::new(format!("Project {}.", summary.name), json!(summary)))
}

#[derive(Deserialize)]
pub struct ExportQuery {
    #[serde(default)]
    history: bool,
}

pub async fn project_export(State(s): St, User(user): User, Segments(id): Segments<String>, Params(q): Params<ExportQuery>) -> ApiResult {
    let text = s.read(&user, &id, |p| Ok(save_project(p, q.history))).await?;
    let document: Value = serde_json::from_str(&text).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Reply::new(if q.history { "Project file, with history." } else { "Project file, without history." }, document))
}

pub async fn project_delete(State(s): St, User(user): User, Segments(id): Segments<String>) -> ApiResult {
    let p = s.remove_project(&user, &id).await?;
    Ok(Reply::new(format!("Project {} deleted.", p.name), json!({ "id": p.id })))
}

pub async fn catalog_get(State(s): St, User(user): User, Segments(id): Segments<String>) -> ApiResult {
    let catalog = s.read(&user, &id, |p| Ok(p.catalog.clone())).await?;
    Ok(Reply::new(format!("The catalog has {}.", plural(catalog.tables.len(), "table", "tables")), json!(catalog)))
}

// ---- graphs ----

pub async fn graph_create(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<NameBody>) -> ApiResult {
    Ok(recorded(s.mutate(&user, &id, |_| Ok(Mutation::CreateGraph { name: b.name })).await?))
}

pub async fn graph_delete(State(s): St, User(user): User, Segments((id, g)): Segments<(String, String)>) -> ApiResult {
    Ok(recorded(s.mutate(&user, &id, |_| Ok(Mutation::DeleteGraph { name: g })).await?))
}

pub async fn graph_get(State(s): St, User(user): User, Segments((id, g)): Segments<(String, String)>) -> ApiResult {
    let doc = s.read(&user, &id, |p| Ok(serde_json::to_value(graph(p, &g)?).expect("graphs serialize"))).await?;
    Ok(Reply::new(format!("Query graph {g}."), doc))
}

fn graph_json(p: &Project, g: &str) -> Value {
    p.graphs.get(g).map(|g| serde_json::to_value(g).expect("graphs serialize")).unwrap_or(Value::Null)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropBody {
    kind: ElementKind,
    x: i64,
    y: i64,
}

pub async fn graph_drop_element(State(s): St, User(user): User, Segments((id, g)): Segments<(String, String)>, Body(b): Body<DropBody>) -> ApiResult {
    let name = g.clone();
    // Ids only grow, so the new element has the largest one.
    let applied = s
        .mutate_then(
            &user,
            &id,
            |_| Ok(Mutation::DropElement { graph: g, kind: b.kind, x: b.x, y: b.y }),
            |p| json!({ "element": p.graphs[&name].elements.values().next_back(), "graph": graph_json(p, &name) }),
        )
        .await?;
    Ok(recorded(applied))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveBody {
    element: ElementId,
    x: i64,
    y: i64,
}

pub async fn graph_move_element(State(s): St, User(user): User, Segments((id, g)): Segments<(String, String)>, Body(b): Body<MoveBody>) -> ApiResult {
    let name = g.clone();
    let applied = s
        .mutate_then(&user, &id, |_| Ok(Mutation::MoveElement { graph: g, id: b.element, x: b.x, y: b.y }), |p| json!({ "element": p.graphs[&name].elements.get(&b.element) }))
        .await?;
    Ok(recorded(applied))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementBody {
    element: ElementId,
}

pub async fn graph_remove_element(State(s): St, User(user): User, Segments((id, g)): Segments<(String, String)>, Body(b): Body<ElementBody>) -> ApiResult {
    let name = g.clone();
    let applied = s.mutate_then(&user, &id, |_| Ok(Mutation::RemoveElement { graph: g, id: b.element }), |p| graph_json(p, &name)).await?;
    Ok(recorded(applied))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeBody {
    from: ElementId,
    to: ElementId,
}

pub async fn graph_connect(State(s): St, User(user): User, Segments((id, g)): Segments<(String, String)>, Body(b): Body<EdgeBody>) -> ApiResult {
    let name = g.clone();
    let applied = s.mutate_then(&user, &id, |_| Ok(Mutation::Connect { graph: g, from: b.from, to: b.to }), |p| graph_json(p, &name)).await?;
    Ok(recorded(applied))
}

pub async fn graph_disconnect(State(s): St, User(user): User, Segments((id, g)): Segments<(String, String)>, Body(b): Body<EdgeBody>) -> ApiResult {
    let name = g.clone();
    let applied = s.mutate_then(&user, &id, |_| Ok(Mutation::Disconnect { graph: g, from: b.from, to: b.to }), |p| graph_json(p, &name)).await?;
    Ok(recorded(applied))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyBody {
    element: ElementId,
    key: String,
    value: PropertyValue,
}

pub async fn graph_set_property(State(s): St, User(user): User, Segments((id, g)): Segments<(String, String)>, Body(b): Body<PropertyBody>) -> ApiResult {
    let name = g.clone();
    let applied = s
        .mutate_then(&user, &id, |_| Ok(Mutation::SetProperty { graph: g, id: b.element, key: b.key, value: b.value }), |p| json!({ "element": p.graphs[&name].elements.get(&b.element) }))
        .await?;
    Ok(recorded(applied))
}

pub async fn graph_property_schema(State(s): St, User(user): User, Segments((id, g)): Segments<(String, String)>, Body(b): Body<ElementBody>) -> ApiResult {
    let schema = s
        .read(&user, &id, |p| {
            let ctx = GraphContext::with_siblings(&p.catalog, &p.graphs, &g);
            Ok(property_schema_in(graph(p, &g)?, b.element, &ctx)?)
        })
        .await?;
    Ok(Reply::new(format!("{} can be set on this {} element.", plural(schema.entries.len(), "property", "properties"), schema.kind), json!(schema)))
}

pub async fn graph_validate(State(s): St, User(user): User, Segments((id, g)): Segments<(String, String)>) -> ApiResult {
    let diags = s
        .read(&user, &id, |p| {
            let ctx = GraphContext::with_siblings(&p.catalog, &p.graphs, &g);
            Ok(validate_graph_in(graph(p, &g)?, &ctx))
        })
        .await?;
    let feedback = match diags.first() {
        None => "The query graph is complete.".to_string(),
        Some(d) => format!("The query graph is not complete yet: {} {}", d.problem, d.hint),
    };
    let list = diags.iter().map(|d| json!(d)).collect();
    Ok(Reply::new(feedback, json!({ "complete": diags.is_empty() })).with_diagnostics(list))
}

pub async fn graph_to_sql(State(s): St, User(user): User, Segments((id, g)): Segments<(String, String)>) -> ApiResult {
    let ast = s
        .read(&user, &id, |p| {
            let ctx = GraphContext::with_siblings(&p.catalog, &p.graphs, &g);
            Ok(graph_to_ast_in(graph(p, &g)?, &ctx)?)
        })
        .await?;
    let canonical = render_select(&ast)?;
    Ok(Reply::new(canonical.text.clone(), json!({ "sql": canonical, "ast": ast })))
}

// ---- project SQL ----

pub async fn sql_analyze(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<SqlBody>) -> ApiResult {
    let (ast, diags) = s.read(&user, &id, |p| analyze_source(&b.sql, &p.catalog).map_err(|e| parse_error(&e, &b.sql))).await?;
    let feedback = match diags.len() {
        0 => "No tips: the query follows every rule.".to_string(),
        n => format!("{}: {}", plural(n, "tip", "tips"), diags.iter().map(|d| d.rule.title()).collect::<Vec<_>>().join("; ")),
    };
    let canonical = render_select(&ast)?;
    let list = diags.iter().map(|d| json!(d)).collect();
    Ok(Reply::new(feedback, json!({ "canonical": canonical })).with_diagnostics(list))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewriteBody {
    sql: String,
    rule: Rule,
    /// Which tip of that rule, in source order.
    #[serde(default)]
    occurrence: usize,
    /// Needed for rewrites that may change the result.
    #[serde(default)]
    confirm: bool,
    /// Also stores the rewritten query under this name.
    #[serde(default)]
    save_as: Option<String>,
}

pub async fn sql_apply_rewrite(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<RewriteBody>) -> ApiResult {
    let (ast, diags) = s.read(&user, &id, |p| analyze_source(&b.sql, &p.catalog).map_err(|e| parse_error(&e, &b.sql))).await?;
    let d = diags
        .iter()
        .filter(|d| d.rule == b.rule)
        .nth(b.occurrence)
        .ok_or_else(|| ApiError::unprocessable(format!("The query has no “{}” tip to apply; analyze it to see the current tips.", b.rule.title())))?;
    if d.equivalence == Equivalence::AlteringNeedsConfirmation && !b.confirm {
        return Err(ApiError::new(axum::http::StatusCode::CONFLICT, format!("{} Send confirm: true to apply it anyway.", d.message)).with_payload(d));
    }
    let rewritten = apply_rewrite(&ast, d)?;
    let canonical = render_select(&rewritten)?;
    let body = json!({ "sql": canonical, "equivalence": d.equivalence, "rule": d.rule });
    match b.save_as {
        None => Ok(Reply::new(format!("Applied “{}”.", d.rule.title()), body)),
        Some(name) => {
            let text = canonical.text.clone();
            let applied = s.mutate_then(&user, &id, |_| Ok(Mutation::SaveQuery { name, sql: text }), move |_| body).await?;
            let mut reply = recorded(applied);
            reply.feedback = format!("Applied “{}”. {}", d.rule.title(), reply.feedback);
            Ok(reply)
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanBody {
    sql: String,
    #[serde(default)]
    stats: Vec<TableStats>,
}

pub async fn sql_plan(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<PlanBody>) -> ApiResult {
    let ast = parse(&b.sql)?;
    let (mut report, comparison) = s.read(&user, &id, |p| Ok((plan(&ast, &p.catalog, &b.stats)?, compare_plans(&ast, &p.catalog, &b.stats)?))).await?;
    if let Some(proxy) = &s.explain {
        let canonical = render_select(&ast)?;
        match proxy.explain(&canonical.text).await {
            Ok(text) => report.server_explain = Some(text),
            Err(e) => report.notes.push(format!("The live server plan is unavailable: {e}.")),
        }
    }
    let feedback = format!(
        "Cheapest of {}: estimated cost {:.2}, planning {:.3} ms, execution {:.3} ms ({}).",
        plural(report.enumerated_plans, "plan", "plans"),
        report.estimated_cost,
        report.estimated_planning_time_ms,
        report.estimated_execution_time_ms,
        report.label
    );
    Ok(Reply::new(feedback, json!({ "report": report, "comparison": comparison })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompleteBody {
    text: String,
    cursor: usize,
}

pub async fn sql_complete(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<CompleteBody>) -> ApiResult {
    let candidates = s.read(&user, &id, |p| Ok(complete(&b.text, b.cursor, &p.catalog))).await?;
    let feedback = match candidates.first() {
        None => "No suggestions here.".to_string(),
        Some(c) => format!("{}; best: {}.", plural(candidates.len(), "suggestion", "suggestions"), c.text),
    };
    Ok(Reply::new(feedback, json!(candidates)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudoBody {
    text: String,
}

pub async fn sql_pseudocode(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<PseudoBody>) -> ApiResult {
    let q = parse_pseudocode(&b.text)?;
    let generated = s.read(&user, &id, |p| Ok(generate_from_pseudocode(&q, &p.catalog))).await?;
    let mut feedback = format!("Generated: {}", generated.sql.text);
    if !generated.warnings.is_empty() {
        feedback = format!("{feedback} Check: {}.", generated.warnings.join("; "));
    }
    let list = generated.warnings.iter().map(|w| json!(w)).collect();
    Ok(Reply::new(feedback, json!({ "request": q, "generated": generated })).with_diagnostics(list))
}

// ---- saved queries ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaveBody {
    name: String,
    sql: String,
}

pub async fn saved_query_save(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<SaveBody>) -> ApiResult {
    let canonical = render_select(&parse(&b.sql)?)?;
    Ok(recorded(s.mutate(&user, &id, |_| Ok(Mutation::SaveQuery { name: b.name, sql: canonical.text })).await?))
}

pub async fn saved_query_delete(State(s): St, User(user): User, Segments((id, name)): Segments<(String, String)>) -> ApiResult {
    Ok(recorded(s.mutate(&user, &id, |_| Ok(Mutation::DeleteSavedQuery { name })).await?))
}

// ---- sandbox ----

pub async fn sandbox_get(State(s): St, User(user): User, Segments(id): Segments<String>) -> ApiResult {
    let db = s.read(&user, &id, |p| Ok(p.sandbox.clone())).await?;
    Ok(Reply::new(format!("The sandbox holds {}.", plural(db.tables.len(), "table", "tables")), json!(db)))
}

pub async fn sandbox_set(State(s): St, User(user): User, Segments(id): Segments<String>, Body(db): Body<MiniDb>) -> ApiResult {
    Ok(recorded(s.mutate(&user, &id, |_| Ok(Mutation::SetSandbox { db })).await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalBody {
    #[serde(default)]
    sql: Option<String>,
    /// Evaluates a saved query graph instead of SQL text.
    #[serde(default)]
    graph: Option<String>,
}

pub async fn sandbox_eval(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<EvalBody>) -> ApiResult {
    let ast = match (&b.sql, &b.graph) {
        (Some(sql), None) => parse(sql)?,
        (None, Some(_)) => {
            let g = b.graph.clone().unwrap_or_default();
            s.read(&user, &id, |p| {
                let ctx = GraphContext::with_siblings(&p.catalog, &p.graphs, &g);
                Ok(graph_to_ast_in(graph(p, &g)?, &ctx)?)
            })
            .await?
        }
        _ => return Err(ApiError::bad_request("Give exactly one of sql or graph.")),
    };
    // The lock is released before evaluating.
    let db = s.read(&user, &id, |p| Ok(p.sandbox.clone())).await?;
    let rel = eval(&ast, &db)?;
    Ok(Reply::new(format!("The query returned {}.", plural(rel.rows.len(), "row", "rows")), json!(rel)))
}

// ---- history ----

#[derive(Deserialize)]
pub struct PageQuery {
    #[serde(default = "page_size")]
    limit: usize,
    #[serde(default)]
    offset: usize,
}

fn page_size() -> usize {
    50
}

pub async fn history_list(State(s): St, User(user): User, Segments(id): Segments<String>, Params(q): Params<PageQuery>) -> ApiResult {
    let (items, total) = s.read(&user, &id, |p| Ok((p.history_view(q.limit, q.offset), p.history.entries.len()))).await?;
    let feedback = if total == 0 { "Nothing has been done in this project yet.".to_string() } else { format!("Showing {} of {}, newest first.", items.len(), plural(total, "action", "actions")) };
    Ok(Reply::new(feedback, json!({ "items": items, "total": total })))
}

pub async fn history_undo(State(s): St, User(user): User, Segments(id): Segments<String>) -> ApiResult {
    let a = s.undo(&user, &id).await?;
    Ok(Reply::new(format!("Undid: {}.", a.entry.human_label), json!({ "entry": a.entry.human_label, "project": a.summary })))
}

pub async fn history_redo(State(s): St, User(user): User, Segments(id): Segments<String>) -> ApiResult {
    let a = s.redo(&user, &id).await?;
    Ok(Reply::new(format!("Redid: {}.", a.entry.human_label), json!({ "entry": a.entry.human_label, "project": a.summary })))
}

// ---- DDL ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Definition<T> {
    definition: T,
    /// Validate and render only.
    #[serde(default)]
    dry_run: bool,
}

async fn create(s: &AppState, user: &str, id: &str, what: &str, ddl: String, dry_run: bool, m: Mutation) -> ApiResult {
    if dry_run {
        return Ok(Reply::new(format!("The {what} definition is valid.\n{ddl}"), json!({ "ddl": ddl })));
    }
    let applied = s.mutate_then(user, id, |_| Ok(m), |_| ()).await?;
    let mut what = what.to_string();
    what[..1].make_ascii_uppercase();
    let mut reply = recorded(applied);
    reply.feedback = format!("{what} created.\n{ddl}");
    if let Value::Object(o) = &mut reply.payload {
        o.insert("ddl".into(), json!(ddl));
    }
    Ok(reply)
}

pub async fn ddl_database(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<Definition<DatabaseDef>>) -> ApiResult {
    validate_database(&b.definition)?;
    let ddl = render_create_database(&b.definition)?;
    create(&s, &user, &id, "database", ddl, b.dry_run, Mutation::AddDatabase { database: b.definition }).await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaBody {
    name: String,
    #[serde(default)]
    dry_run: bool,
}

pub async fn ddl_schema(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<SchemaBody>) -> ApiResult {
    validate_identifier(&b.name)?;
    let ddl = render_create_schema(&b.name)?;
    create(&s, &user, &id, "schema", ddl, b.dry_run, Mutation::AddSchema { name: b.name }).await
}

pub async fn ddl_table(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<Definition<TableDef>>) -> ApiResult {
    validate_table(&b.definition)?;
    let ddl = render_create_table(&b.definition)?;
    create(&s, &user, &id, "table", ddl, b.dry_run, Mutation::AddTable { table: b.definition }).await
}

pub async fn ddl_index(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<Definition<IndexDef>>) -> ApiResult {
    s.read(&user, &id, |p| Ok(validate_index(&b.definition, &p.catalog)?)).await?;
    let ddl = render_create_index(&b.definition)?;
    create(&s, &user, &id, "index", ddl, b.dry_run, Mutation::AddIndex { index: b.definition }).await
}

pub async fn ddl_trigger(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<Definition<TriggerDef>>) -> ApiResult {
    s.read(&user, &id, |p| Ok(validate_trigger(&b.definition, &p.catalog)?)).await?;
    let ddl = render_create_trigger(&b.definition)?;
    create(&s, &user, &id, "trigger", ddl, b.dry_run, Mutation::AddTrigger { trigger: b.definition }).await
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Database,
    Schema,
    Table,
    Index,
    Trigger,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropBodyDdl {
    kind: ObjectKind,
    name: String,
}

pub async fn ddl_drop(State(s): St, User(user): User, Segments(id): Segments<String>, Body(b): Body<DropBodyDdl>) -> ApiResult {
    let name = b.name;
    let m = match b.kind {
        ObjectKind::Database => Mutation::RemoveDatabase { name },
        ObjectKind::Schema => Mutation::RemoveSchema { name },
        ObjectKind::Table => Mutation::RemoveTable { name },
        ObjectKind::Index => Mutation::RemoveIndex { name },
        ObjectKind::Trigger => Mutation::RemoveTrigger { name },
    };
    Ok(recorded(s.mutate(&user, &id, |_| Ok(m)).await?))
}

// ---- fallbacks ----

pub async fn not_found() -> ApiError {
    ApiError::not_found("There is no such endpoint; GET /api-reference lists them all.")
}

pub async fn method_not_allowed() -> ApiError {
    ApiError::new(axum::http::StatusCode::METHOD_NOT_ALLOWED, "This endpoint does not accept that method; GET /api-reference lists the methods for each path.")
}
