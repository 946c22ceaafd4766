//! The route table and the router built from it.

use std::sync::Arc;

use axum::routing::{delete, get, post};
use axum::Router;
use serde::Serialize;

use crate::handlers as h;
use crate::state::AppState;

/// How a route touches stored state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteKind {
    /// Needs no session.
    Public,
    /// Reads only.
    Read,
    /// Changes a project; always recorded as exactly one history entry.
    Edit,
    /// Moves through a project's history.
    Step,
    /// Creates or removes a whole project, or an account.
    Lifecycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RouteInfo {
    pub method: &'static str,
    pub path: &'static str,
    /// The engine operation behind the route.
    pub operation: &'static str,
    pub kind: RouteKind,
    /// The JSON body's fields, or the query string.
    pub body: &'static str,
}

const fn r(method: &'static str, path: &'static str, operation: &'static str, kind: RouteKind, body: &'static str) -> RouteInfo {
    RouteInfo { method, path, operation, kind, body }
}

use RouteKind::*;

pub const ROUTES: &[RouteInfo] = &[
    r("GET", "/health", "health", Public, ""),
    r("GET", "/api-reference", "api_reference", Public, ""),
    r("POST", "/auth/register", "create_user", Lifecycle, "username, password, is_superuser?, can_create_role?"),
    r("POST", "/auth/login", "authenticate", Public, "username, password"),
    r("POST", "/auth/logout", "end_session", Read, ""),
    r("GET", "/types", "registered_types", Read, ""),
    r("POST", "/types/describe", "describe_data_type", Read, "name"),
    r("GET", "/objects/context-actions", "context_actions", Read, "?kind=database|schema|table|column|index"),
    r("POST", "/ddl/index-options", "unique_option_hint", Read, "method"),
    r("POST", "/sql/parse", "parse_select", Read, "sql"),
    r("POST", "/sql/render", "render_select", Read, "ast"),
    r("GET", "/projects", "list_projects", Read, ""),
    r("POST", "/projects", "create_project", Lifecycle, "name"),
    r("POST", "/projects/import", "load_project", Lifecycle, "document"),
    r("GET", "/projects/{id}", "project_summary", Read, ""),
    r("DELETE", "/projects/{id}", "delete_project", Lifecycle, ""),
    r("GET", "/projects/{id}/export", "save_project", Read, "?history=true|false"),
    r("GET", "/projects/{id}/catalog", "catalog", Read, ""),
    r("POST", "/projects/{id}/graphs", "create_graph", Edit, "name"),
    r("GET", "/projects/{id}/graphs/{graph}", "graph_document", Read, ""),
    r("DELETE", "/projects/{id}/graphs/{graph}", "delete_graph", Edit, ""),
    r("POST", "/projects/{id}/graphs/{graph}/drop-element", "drop_element", Edit, "kind, x, y"),
    r("POST", "/projects/{id}/graphs/{graph}/move-element", "move_element", Edit, "element, x, y"),
    r("POST", "/projects/{id}/graphs/{graph}/remove-element", "remove_element", Edit, "element"),
    r("POST", "/projects/{id}/graphs/{graph}/connect", "connect", Edit, "from, to"),
    r("POST", "/projects/{id}/graphs/{graph}/disconnect", "disconnect", Edit, "from, to"),
    r("POST", "/projects/{id}/graphs/{graph}/set-property", "set_property", Edit, "element, key, value"),
    r("POST", "/projects/{id}/graphs/{graph}/property-schema", "property_schema_for", Read, "element"),
    r("GET", "/projects/{id}/graphs/{graph}/validate", "validate_graph", Read, ""),
    r("GET", "/projects/{id}/graphs/{graph}/to-sql", "graph_to_ast", Read, ""),
    r("POST", "/projects/{id}/sql/analyze", "analyze", Read, "sql"),
    r("POST", "/projects/{id}/sql/apply-rewrite", "apply_rewrite", Read, "sql, rule, occurrence?, confirm?, save_as? (save_as records one edit)"),
    r("POST", "/projects/{id}/sql/plan", "plan", Read, "sql, stats?"),
    r("POST", "/projects/{id}/sql/complete", "complete", Read, "text, cursor"),
    r("POST", "/projects/{id}/sql/pseudocode", "generate_from_pseudocode", Read, "text"),
    r("POST", "/projects/{id}/saved-queries", "save_query", Edit, "name, sql"),
    r("DELETE", "/projects/{id}/saved-queries/{name}", "delete_saved_query", Edit, ""),
    r("GET", "/projects/{id}/sandbox", "sandbox", Read, ""),
    r("PUT", "/projects/{id}/sandbox", "set_sandbox", Edit, "tables: [{name, columns, rows}]"),
    r("POST", "/projects/{id}/sandbox/eval", "eval", Read, "sql | graph"),
    r("GET", "/projects/{id}/history", "history_view", Read, "?limit&offset"),
    r("POST", "/projects/{id}/history/undo", "undo", Step, ""),
    r("POST", "/projects/{id}/history/redo", "redo", Step, ""),
    r("POST", "/projects/{id}/ddl/database", "add_database", Edit, "definition, dry_run?"),
    r("POST", "/projects/{id}/ddl/schema", "add_schema", Edit, "name, dry_run?"),
    r("POST", "/projects/{id}/ddl/table", "add_table", Edit, "definition, dry_run?"),
    r("POST", "/projects/{id}/ddl/index", "add_index", Edit, "definition, dry_run?"),
    r("POST", "/projects/{id}/ddl/trigger", "add_trigger", Edit, "definition, dry_run?"),
    r("POST", "/projects/{id}/ddl/drop", "remove_object", Edit, "kind, name"),
];

/// A plain-text listing of every route.
pub fn api_reference() -> String {
    let width = ROUTES.iter().map(|r| r.method.len() + 1 + r.path.len()).max().unwrap_or(0);
    let mut out = String::from("Every response is {status, feedback, payload, diagnostics?}. Routes other than public ones need Authorization: Bearer <token>.\n\n");
    for r in ROUTES {
        let head = format!("{} {}", r.method, r.path);
        let kind = serde_json::to_value(r.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        let line = format!("{head:width$}  {:<26} {:<9} {}", r.operation, kind, r.body);
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(h::health))
        .route("/api-reference", get(h::reference))
        .route("/auth/register", post(h::register))
        .route("/auth/login", post(h::login))
        .route("/auth/logout", post(h::logout))
        .route("/types", get(h::types_list))
        .route("/types/describe", post(h::types_describe))
        .route("/objects/context-actions", get(h::objects_context_actions))
        .route("/ddl/index-options", post(h::ddl_index_options))
        .route("/sql/parse", post(h::sql_parse))
        .route("/sql/render", post(h::sql_render))
        .route("/projects", get(h::projects_list).post(h::projects_create))
        .route("/projects/import", post(h::projects_import))
        .route("/projects/{id}", get(h::project_get).delete(h::project_delete))
        .route("/projects/{id}/export", get(h::project_export))
        .route("/projects/{id}/catalog", get(h::catalog_get))
        .route("/projects/{id}/graphs", post(h::graph_create))
        .route("/projects/{id}/graphs/{graph}", get(h::graph_get).delete(h::graph_delete))
        .route("/projects/{id}/graphs/{graph}/drop-element", post(h::graph_drop_element))
        .route("/projects/{id}/graphs/{graph}/move-element", post(h::graph_move_element))
        .route("/projects/{id}/graphs/{graph}/remove-element", post(h::graph_remove_element))
        .route("/projects/{id}/graphs/{graph}/connect", post(h::graph_connect))
        .route("/projects/{id}/graphs/{graph}/disconnect", post(h::graph_disconnect))
        .route("/projects/{id}/graphs/{graph}/set-property", post(h::graph_set_property))
        .route("/projects/{id}/graphs/{graph}/property-schema", post(h::graph_property_schema))
        .route("/projects/{id}/graphs/{graph}/validate", get(h::graph_validate))
        .route("/projects/{id}/graphs/{graph}/to-sql", get(h::graph_to_sql))
        .route("/projects/{id}/sql/analyze", post(h::sql_analyze))
        .route("/projects/{id}/sql/apply-rewrite", post(h::sql_apply_rewrite))
        .route("/projects/{id}/sql/plan", post(h::sql_plan))
        .route("/projects/{id}/sql/complete", post(h::sql_complete))
        .route("/projects/{id}/sql/pseudocode", post(h::sql_pseudocode))
        .route("/projects/{id}/saved-queries", post(h::saved_query_save))
        .route("/projects/{id}/saved-queries/{name}", delete(h::saved_query_delete))
        .route("/projects/{id}/sandbox", get(h::sandbox_get).put(h::sandbox_set))
        .route("/projects/{id}/sandbox/eval", post(h::sandbox_eval))
        .route("/projects/{id}/history", get(h::history_list))
        .route("/projects/{id}/history/undo", post(h::history_undo))
        .route("/projects/{id}/history/redo", post(h::history_redo))
        .route("/projects/{id}/ddl/database", post(h::ddl_database))
        .route("/projects/{id}/ddl/schema", post(h::ddl_schema))
        .route("/projects/{id}/ddl/table", post(h::ddl_table))
        .route("/projects/{id}/ddl/index", post(h::ddl_index))
        .route("/projects/{id}/ddl/trigger", post(h::ddl_trigger))
        .route("/projects/{id}/ddl/drop", post(h::ddl_drop))
        .fallback(h::not_found)
        .method_not_allowed_fallback(h::method_not_allowed)
        .with_state(state)
}
