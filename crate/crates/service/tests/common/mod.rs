#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use axum::body::Body as HttpBody;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use pgstudio_core::sql::parse_select;
use pgstudio_core::workspace::FakeDigester;
use pgstudio_service::{app, AppState, ApiResponse, RouteKind, ServiceConfig, Status, ROUTES};

pub fn fixture(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[derive(Clone)]
pub struct TestApp {
    pub router: Router,
    pub state: Arc<AppState>,
}

pub enum Payload<'a> {
    None,
    Json(Value),
    Raw(&'a str),
}

impl TestApp {
    pub fn new() -> Self {
        Self::with_config(ServiceConfig::default())
    }

    pub fn with_config(config: ServiceConfig) -> Self {
        Self::from_state(Arc::new(AppState::with_digester(config, Box::new(FakeDigester))))
    }

    pub fn from_state(state: Arc<AppState>) -> Self {
        TestApp { router: app(state.clone()).unwrap(), state }
    }

    /// Sends one request; the body must be a response envelope.
    pub async fn call(&self, method: &str, path: &str, token: Option<&str>, body: Payload<'_>) -> (StatusCode, ApiResponse) {
        let mut req = Request::builder().method(method).uri(path);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let body = match body {
            Payload::None => HttpBody::empty(),
            Payload::Json(v) => {
                req = req.header("content-type", "application/json");
                HttpBody::from(v.to_string())
            }
            Payload::Raw(s) => {
                req = req.header("content-type", "application/json");
                HttpBody::from(s.to_string())
            }
        };
        let resp = self.router.clone().oneshot(req.body(body).unwrap()).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let parsed: ApiResponse = serde_json::from_slice(&bytes).unwrap_or_else(|e| panic!("{method} {path}: body is not an envelope ({e}): {}", String::from_utf8_lossy(&bytes)));
        (status, parsed)
    }

    pub async fn ok(&self, method: &str, path: &str, token: Option<&str>, body: Value) -> ApiResponse {
        let (code, r) = self.call(method, path, token, Payload::Json(body)).await;
        assert!(code.is_success() && r.status == Status::Ok, "{method} {path}: {code} {}", r.feedback);
        r
    }

    /// Registers and signs in `name`, returning the session token.
    pub async fn sign_up(&self, name: &str) -> String {
        self.ok("POST", "/auth/register", None, json!({ "username": name, "password": "pw" })).await;
        let r = self.ok("POST", "/auth/login", None, json!({ "username": name, "password": "pw" })).await;
        r.payload["token"].as_str().unwrap().to_string()
    }

    pub async fn new_project(&self, token: &str, name: &str) -> String {
        let r = self.ok("POST", "/projects", Some(token), json!({ "name": name })).await;
        r.payload["id"].as_str().unwrap().to_string()
    }
}

/// What a successful call must do to the project it names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effect {
    Nothing,
    Edit,
    Undo,
    Redo,
    /// Adds or removes a whole project.
    Lifecycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Ok(Effect),
    Fail,
}

type Snapshot = BTreeMap<String, (String, usize, usize)>;

#[derive(Debug, Default)]
pub struct CrawlReport {
    pub calls: usize,
    pub failures: Vec<String>,
    pub uncovered: Vec<String>,
    /// Successful recorded edits, and the sum of history growth they caused.
    pub edits: usize,
    pub history_growth: usize,
    pub unauthenticated_checks: usize,
}

pub struct Crawler {
    pub app: TestApp,
    pub token: String,
    owners: Vec<String>,
    covered: BTreeSet<(String, String)>,
    pub report: CrawlReport,
}

impl Crawler {
    async fn snapshot(&self) -> Snapshot {
        let mut out = BTreeMap::new();
        for owner in &self.owners {
            for p in self.app.state.list_projects(owner) {
                let p = p.read().await;
                out.insert(p.id.clone(), (p.state_hash(), p.history.entries.len(), p.history.redo.len()));
            }
        }
        out
    }

    fn fail(&mut self, msg: String) {
        self.report.failures.push(msg);
    }

    /// Calls one route and checks the envelope, the outcome and what
    /// changed in every stored project.
    pub async fn call(&mut self, method: &str, template: &str, path: &str, body: Payload<'_>, expect: Expect) -> ApiResponse {
        self.covered.insert((method.to_string(), template.to_string()));
        let before = self.snapshot().await;
        let (code, r) = self.app.call(method, path, Some(&self.token), body).await;
        let after = self.snapshot().await;
        self.report.calls += 1;
        let what = format!("{method} {path}");
        if r.feedback.trim().is_empty() {
            self.fail(format!("{what}: empty feedback"));
        }
        if (r.status == Status::Ok) != code.is_success() {
            self.fail(format!("{what}: status {:?} with HTTP {code}", r.status));
        }
        if r.status == Status::Error && !(code.is_client_error() || code.is_server_error()) {
            self.fail(format!("{what}: error with HTTP {code}"));
        }
        let effect = match (expect, r.status) {
            (Expect::Ok(e), Status::Ok) => e,
            (Expect::Fail, Status::Error) => Effect::Nothing,
            (Expect::Ok(_), Status::Error) => {
                self.fail(format!("{what}: expected success, got {code}: {}", r.feedback));
                Effect::Nothing
            }
            (Expect::Fail, Status::Ok) => {
                self.fail(format!("{what}: expected an error, got: {}", r.feedback));
                return r;
            }
        };
        let target = path.strip_prefix("/projects/").and_then(|rest| rest.split(['/', '?']).next()).map(str::to_string);
        if effect == Effect::Lifecycle {
            for (id, v) in &before {
                if after.get(id).is_some_and(|a| a != v) {
                    self.fail(format!("{what}: project {id} changed"));
                }
            }
            return r;
        }
        for (id, b) in &before {
            let Some(a) = after.get(id) else {
                self.fail(format!("{what}: project {id} disappeared"));
                continue;
            };
            let targeted = target.as_deref() == Some(id.as_str());
            let ok = match (targeted, effect) {
                (true, Effect::Edit) => a.1 == b.1 + 1 && a.2 == 0,
                (true, Effect::Undo) => a.1 + 1 == b.1 && a.2 == b.2 + 1,
                (true, Effect::Redo) => a.1 == b.1 + 1 && a.2 + 1 == b.2,
                _ => a == b,
            };
            if !ok {
                self.fail(format!("{what}: project {id} went from {b:?} to {a:?} for {effect:?}"));
            }
            if targeted && effect == Effect::Edit {
                self.report.edits += 1;
                self.report.history_growth += a.1 - b.1;
            }
        }
        if after.len() != before.len() {
            self.fail(format!("{what}: the number of projects changed"));
        }
        r
    }

    pub async fn ok(&mut self, method: &str, template: &str, path: &str, body: Value, effect: Effect) -> ApiResponse {
        self.call(method, template, path, Payload::Json(body), Expect::Ok(effect)).await
    }

    pub async fn get(&mut self, template: &str, path: &str) -> ApiResponse {
        self.call("GET", template, path, Payload::None, Expect::Ok(Effect::Nothing)).await
    }

    pub async fn bad(&mut self, method: &str, template: &str, path: &str, body: Value) -> ApiResponse {
        self.call(method, template, path, Payload::Json(body), Expect::Fail).await
    }

    pub async fn malformed(&mut self, method: &str, template: &str, path: &str) {
        self.call(method, template, path, Payload::Raw("{\"oops\": "), Expect::Fail).await;
        self.call(method, template, path, Payload::Json(json!({ "unexpected": true })), Expect::Fail).await;
        self.call(method, template, path, Payload::None, Expect::Fail).await;
    }
}

fn expected_effect(kind: RouteKind) -> Effect {
    match kind {
        RouteKind::Edit => Effect::Edit,
        RouteKind::Step => Effect::Nothing,
        RouteKind::Lifecycle => Effect::Lifecycle,
        RouteKind::Public | RouteKind::Read => Effect::Nothing,
    }
}

fn table_def(name: &str, columns: Value) -> Value {
    json!({ "definition": { "schema": "public", "name": name, "columns": columns } })
}

/// Calls every route with valid and invalid requests and checks that each
/// answer carries feedback and that only recorded edits change projects.
pub async fn crawl() -> CrawlReport {
    let app = TestApp::new();
    let (_, reg) = app.call("POST", "/auth/register", None, Payload::Json(json!({ "username": "ana", "password": "pw" }))).await;
    assert_eq!(reg.status, Status::Ok, "{}", reg.feedback);
    let (_, login) = app.call("POST", "/auth/login", None, Payload::Json(json!({ "username": "ana", "password": "pw" }))).await;
    let token = login.payload["token"].as_str().unwrap().to_string();
    let mut c = Crawler { app: app.clone(), token, owners: vec!["ana".into(), "bo".into()], covered: BTreeSet::new(), report: CrawlReport::default() };
    c.covered.insert(("POST".into(), "/auth/login".into()));

    // Service and account routes.
    c.get("/health", "/health").await;
    c.get("/api-reference", "/api-reference").await;
    let t = "/auth/register";
    c.ok("POST", t, t, json!({ "username": "bo", "password": "pw" }), Effect::Lifecycle).await;
    c.bad("POST", t, t, json!({ "username": "9ana", "password": "pw" })).await;
    c.bad("POST", t, t, json!({ "username": "bo", "password": "pw" })).await;
    c.bad("POST", t, t, json!({ "username": "cy", "password": "" })).await;
    c.malformed("POST", t, t).await;
    let t = "/auth/login";
    c.ok("POST", t, t, json!({ "username": "bo", "password": "pw" }), Effect::Nothing).await;
    c.bad("POST", t, t, json!({ "username": "bo", "password": "nope" })).await;
    c.malformed("POST", t, t).await;

    // Reference data.
    c.get("/types", "/types").await;
    let t = "/types/describe";
    c.ok("POST", t, t, json!({ "name": "serial" }), Effect::Nothing).await;
    c.bad("POST", t, t, json!({ "name": "dubble" })).await;
    c.malformed("POST", t, t).await;
    let t = "/objects/context-actions";
    c.get(t, "/objects/context-actions?kind=database").await;
    c.get(t, "/objects/context-actions?kind=table").await;
    c.call("GET", t, "/objects/context-actions?kind=foo", Payload::None, Expect::Fail).await;
    c.call("GET", t, "/objects/context-actions", Payload::None, Expect::Fail).await;
    let t = "/ddl/index-options";
    c.ok("POST", t, t, json!({ "method": "btree" }), Effect::Nothing).await;
    c.ok("POST", t, t, json!({ "method": "hash" }), Effect::Nothing).await;
    c.bad("POST", t, t, json!({ "method": "rtree" })).await;
    c.malformed("POST", t, t).await;

    // Stateless SQL.
    let t = "/sql/parse";
    c.ok("POST", t, t, json!({ "sql": "SELECT name FROM customers WHERE age > 3;" }), Effect::Nothing).await;
    c.bad("POST", t, t, json!({ "sql": "SELECT name FROM;" })).await;
    c.bad("POST", t, t, json!({ "sql": "DELETE FROM customers;" })).await;
    c.malformed("POST", t, t).await;
    let t = "/sql/render";
    let ast = serde_json::to_value(parse_select("SELECT DISTINCT city FROM customers ORDER BY city;").unwrap()).unwrap();
    c.ok("POST", t, t, json!({ "ast": ast }), Effect::Nothing).await;
    let mut empty = ast.clone();
    empty["select_list"] = json!([]);
    c.bad("POST", t, t, json!({ "ast": empty })).await;
    c.malformed("POST", t, t).await;

    // Projects.
    let t = "/projects";
    let created = c.ok("POST", t, t, json!({ "name": "shop" }), Effect::Lifecycle).await;
    let id = created.payload["id"].as_str().unwrap_or_default().to_string();
    c.bad("POST", t, t, json!({ "name": "  " })).await;
    c.malformed("POST", t, t).await;
    c.get(t, t).await;
    let t = "/projects/import";
    let doc: Value = serde_json::from_str(&fixture("project_v1.json")).unwrap();
    let imported = c.ok("POST", t, t, json!({ "document": doc }), Effect::Lifecycle).await;
    let imported_id = imported.payload["id"].as_str().unwrap_or_default().to_string();
    c.bad("POST", t, t, json!({ "document": { "version": 99 } })).await;
    c.bad("POST", t, t, json!({ "document": "{ not json" })).await;
    c.malformed("POST", t, t).await;
    let p = format!("/projects/{id}");
    c.get("/projects/{id}", &p).await;
    c.call("GET", "/projects/{id}", "/projects/no-such-project", Payload::None, Expect::Fail).await;
    c.get("/projects/{id}/export", &format!("{p}/export?history=true")).await;
    c.get("/projects/{id}/export", &format!("{p}/export")).await;
    c.call("GET", "/projects/{id}/export", &format!("{p}/export?history=maybe"), Payload::None, Expect::Fail).await;
    c.get("/projects/{id}/catalog", &format!("{p}/catalog")).await;

    // Another user cannot see the project.
    let (_, bo) = app.call("POST", "/auth/login", None, Payload::Json(json!({ "username": "bo", "password": "pw" }))).await;
    let bo_token = bo.payload["token"].as_str().unwrap().to_string();
    let (code, r) = app.call("GET", &p, Some(&bo_token), Payload::None).await;
    if code != StatusCode::NOT_FOUND || r.feedback.is_empty() {
        c.fail(format!("another user reached project {id}: {code}"));
    }
    let (code, _) = app.call("POST", &format!("{p}/graphs"), Some(&bo_token), Payload::Json(json!({ "name": "x" }))).await;
    if code != StatusCode::NOT_FOUND {
        c.fail(format!("another user edited project {id}: {code}"));
    }

    // DDL.
    let t = "/projects/{id}/ddl/schema";
    let u = format!("{p}/ddl/schema");
    c.ok("POST", t, &u, json!({ "name": "sales" }), Effect::Edit).await;
    c.ok("POST", t, &u, json!({ "name": "staging", "dry_run": true }), Effect::Nothing).await;
    c.bad("POST", t, &u, json!({ "name": "2sales" })).await;
    c.bad("POST", t, &u, json!({ "name": "sales" })).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/ddl/database";
    let u = format!("{p}/ddl/database");
    c.ok("POST", t, &u, json!({ "definition": { "name": "shopdb" } }), Effect::Edit).await;
    c.bad("POST", t, &u, json!({ "definition": { "name": "1shop" } })).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/ddl/table";
    let u = format!("{p}/ddl/table");
    let columns = json!([
        { "name": "id", "data_type": "serial", "column_constraints": [ { "kind": "NOT_NULL", "level": "column" }, { "kind": "UNIQUE", "level": "column" } ] },
        { "name": "name", "data_type": "text" },
        { "name": "age", "data_type": "integer" },
        { "name": "city", "data_type": "text" }
    ]);
    c.ok("POST", t, &u, table_def("customers", columns.clone()), Effect::Edit).await;
    let mut dry = table_def("drafts", columns.clone());
    dry["dry_run"] = json!(true);
    c.ok("POST", t, &u, dry, Effect::Nothing).await;
    c.bad("POST", t, &u, table_def("3items", columns.clone())).await;
    c.bad("POST", t, &u, table_def("items", json!([{ "name": "id", "data_type": "dubble" }]))).await;
    c.bad("POST", t, &u, table_def("customers", columns.clone())).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/ddl/index";
    let u = format!("{p}/ddl/index");
    let index = |method: &str| json!({ "definition": { "name": "customers_age_idx", "table": "customers", "columns": [{ "name": "age" }], "method": method, "unique": true } });
    c.bad("POST", t, &u, index("hash")).await;
    c.ok("POST", t, &u, index("btree"), Effect::Edit).await;
    c.bad("POST", t, &u, json!({ "definition": { "name": "ghost_idx", "table": "ghosts", "columns": [{ "name": "a" }], "method": "btree" } })).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/ddl/trigger";
    let u = format!("{p}/ddl/trigger");
    let trigger = |timing: &str| json!({ "definition": { "name": "audit_customers", "timing": timing, "event": "INSERT", "target": "customers", "function_name": "log_change" } });
    c.ok("POST", t, &u, trigger("AFTER"), Effect::Edit).await;
    c.bad("POST", t, &u, trigger("INSTEAD_OF")).await;
    c.malformed("POST", t, &u).await;

    // Sandbox data.
    let t = "/projects/{id}/sandbox";
    let u = format!("{p}/sandbox");
    let db: Value = serde_json::from_str(&fixture("minidb.json")).unwrap();
    c.call("PUT", t, &u, Payload::Json(db), Expect::Ok(Effect::Edit)).await;
    c.call("PUT", t, &u, Payload::Json(json!({ "tables": [{ "name": "t", "columns": ["a", "b"], "rows": [[1]] }] })), Expect::Fail).await;
    c.call("PUT", t, &u, Payload::Raw("[1, 2"), Expect::Fail).await;
    c.get(t, &u).await;

    // Query graphs.
    let t = "/projects/{id}/graphs";
    let u = format!("{p}/graphs");
    c.ok("POST", t, &u, json!({ "name": "main" }), Effect::Edit).await;
    c.ok("POST", t, &u, json!({ "name": "empty" }), Effect::Edit).await;
    c.bad("POST", t, &u, json!({ "name": "main" })).await;
    c.bad("POST", t, &u, json!({ "name": "" })).await;
    c.malformed("POST", t, &u).await;
    let g = format!("{p}/graphs/main");
    c.get("/projects/{id}/graphs/{graph}", &g).await;
    c.call("GET", "/projects/{id}/graphs/{graph}", &format!("{p}/graphs/nope"), Payload::None, Expect::Fail).await;
    let t = "/projects/{id}/graphs/{graph}/drop-element";
    let u = format!("{g}/drop-element");
    for (kind, x, y) in [("SELECT", 500, 200), ("TABLE", 20, 200), ("WHERE", 250, 400), ("HAVING", 250, 20)] {
        c.ok("POST", t, &u, json!({ "kind": kind, "x": x, "y": y }), Effect::Edit).await;
    }
    c.bad("POST", t, &u, json!({ "kind": "SELECT", "x": 10, "y": 10 })).await;
    c.bad("POST", t, &u, json!({ "kind": "BOGUS", "x": 10, "y": 10 })).await;
    c.bad("POST", t, &format!("{p}/graphs/nope/drop-element"), json!({ "kind": "TABLE", "x": 10, "y": 10 })).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/graphs/{graph}/set-property";
    let u = format!("{g}/set-property");
    c.ok("POST", t, &u, json!({ "element": 2, "key": "table_name", "value": "customers" }), Effect::Edit).await;
    c.bad("POST", t, &u, json!({ "element": 2, "key": "colour", "value": "red" })).await;
    c.bad("POST", t, &u, json!({ "element": 2, "key": "table_name", "value": "ghosts" })).await;
    c.bad("POST", t, &u, json!({ "element": 99, "key": "table_name", "value": "customers" })).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/graphs/{graph}/connect";
    let u = format!("{g}/connect");
    c.ok("POST", t, &u, json!({ "from": 2, "to": 1 }), Effect::Edit).await;
    c.ok("POST", t, &u, json!({ "from": 3, "to": 1 }), Effect::Edit).await;
    c.bad("POST", t, &u, json!({ "from": 4, "to": 1 })).await;
    c.bad("POST", t, &u, json!({ "from": 1, "to": 1 })).await;
    c.bad("POST", t, &u, json!({ "from": 2, "to": 1 })).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/graphs/{graph}/remove-element";
    let u = format!("{g}/remove-element");
    c.ok("POST", t, &u, json!({ "element": 4 }), Effect::Edit).await;
    c.bad("POST", t, &u, json!({ "element": 4 })).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/graphs/{graph}/set-property";
    let u = format!("{g}/set-property");
    c.ok("POST", t, &u, json!({ "element": 1, "key": "columns", "value": ["name", "age"] }), Effect::Edit).await;
    c.ok("POST", t, &u, json!({ "element": 3, "key": "column", "value": "age" }), Effect::Edit).await;
    c.ok("POST", t, &u, json!({ "element": 3, "key": "operator", "value": ">=" }), Effect::Edit).await;
    c.ok("POST", t, &u, json!({ "element": 3, "key": "value", "value": "18" }), Effect::Edit).await;
    c.bad("POST", t, &u, json!({ "element": 1, "key": "columns", "value": ["shoe_size"] })).await;
    let t = "/projects/{id}/graphs/{graph}/property-schema";
    let u = format!("{g}/property-schema");
    c.ok("POST", t, &u, json!({ "element": 1 }), Effect::Nothing).await;
    c.bad("POST", t, &u, json!({ "element": 99 })).await;
    c.malformed("POST", t, &u).await;
    c.get("/projects/{id}/graphs/{graph}/validate", &format!("{g}/validate")).await;
    c.get("/projects/{id}/graphs/{graph}/validate", &format!("{p}/graphs/empty/validate")).await;
    c.call("GET", "/projects/{id}/graphs/{graph}/validate", &format!("{p}/graphs/nope/validate"), Payload::None, Expect::Fail).await;
    c.get("/projects/{id}/graphs/{graph}/to-sql", &format!("{g}/to-sql")).await;
    c.call("GET", "/projects/{id}/graphs/{graph}/to-sql", &format!("{p}/graphs/empty/to-sql"), Payload::None, Expect::Fail).await;
    let t = "/projects/{id}/graphs/{graph}/move-element";
    let u = format!("{g}/move-element");
    c.ok("POST", t, &u, json!({ "element": 1, "x": 5000, "y": -40 }), Effect::Edit).await;
    c.bad("POST", t, &u, json!({ "element": 99, "x": 1, "y": 1 })).await;
    c.malformed("POST", t, &u).await;

    // Project SQL.
    let t = "/projects/{id}/sql/analyze";
    let u = format!("{p}/sql/analyze");
    c.ok("POST", t, &u, json!({ "sql": "SELECT * FROM customers;" }), Effect::Nothing).await;
    c.ok("POST", t, &u, json!({ "sql": "SELECT name FROM customers;" }), Effect::Nothing).await;
    c.bad("POST", t, &u, json!({ "sql": "SELECT FROM customers" })).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/sql/apply-rewrite";
    let u = format!("{p}/sql/apply-rewrite");
    c.ok("POST", t, &u, json!({ "sql": "SELECT * FROM customers;", "rule": "A_STAR_EXPANSION" }), Effect::Nothing).await;
    c.ok("POST", t, &u, json!({ "sql": "SELECT * FROM customers;", "rule": "A_STAR_EXPANSION", "save_as": "expanded" }), Effect::Edit).await;
    let union = "SELECT city FROM customers UNION SELECT city FROM customers;";
    c.bad("POST", t, &u, json!({ "sql": union, "rule": "F_UNION_TO_UNION_ALL" })).await;
    c.ok("POST", t, &u, json!({ "sql": union, "rule": "F_UNION_TO_UNION_ALL", "confirm": true }), Effect::Nothing).await;
    c.bad("POST", t, &u, json!({ "sql": "SELECT name FROM customers;", "rule": "B_HAVING_TO_WHERE" })).await;
    c.bad("POST", t, &u, json!({ "sql": "SELECT COUNT(*) FROM customers;", "rule": "D_COUNT_STAR_ALTERNATIVE" })).await;
    c.bad("POST", t, &u, json!({ "sql": "SELECT * FROM customers;", "rule": "Z" })).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/sql/plan";
    let u = format!("{p}/sql/plan");
    c.ok("POST", t, &u, json!({ "sql": "SELECT name FROM customers WHERE age > 3 AND city = 'Oslo';", "stats": [{ "table": "customers", "row_count": 1000 }] }), Effect::Nothing).await;
    c.ok("POST", t, &u, json!({ "sql": "SELECT name FROM customers;" }), Effect::Nothing).await;
    c.bad("POST", t, &u, json!({ "sql": union })).await;
    c.bad("POST", t, &u, json!({ "sql": "SELECT" })).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/sql/complete";
    let u = format!("{p}/sql/complete");
    c.ok("POST", t, &u, json!({ "text": "SELECT  FROM customers", "cursor": 7 }), Effect::Nothing).await;
    c.ok("POST", t, &u, json!({ "text": "SELECT name FROM customers WHERE age > 3 ", "cursor": 99 }), Effect::Nothing).await;
    c.bad("POST", t, &u, json!({ "text": 1, "cursor": 0 })).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/sql/pseudocode";
    let u = format!("{p}/sql/pseudocode");
    c.ok("POST", t, &u, json!({ "text": "get name, age from customers where age greater than 30 sorted by age descending" }), Effect::Nothing).await;
    c.ok("POST", t, &u, json!({ "text": "show all from ghosts" }), Effect::Nothing).await;
    c.bad("POST", t, &u, json!({ "text": "frobnicate the database" })).await;
    c.malformed("POST", t, &u).await;

    // Saved queries.
    let t = "/projects/{id}/saved-queries";
    let u = format!("{p}/saved-queries");
    c.ok("POST", t, &u, json!({ "name": "adults", "sql": "select name from customers where age >= 18" }), Effect::Edit).await;
    c.bad("POST", t, &u, json!({ "name": "broken", "sql": "SELECT name FROM;" })).await;
    c.bad("POST", t, &u, json!({ "name": "", "sql": "SELECT name FROM customers;" })).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/saved-queries/{name}";
    c.call("DELETE", t, &format!("{p}/saved-queries/adults"), Payload::None, Expect::Ok(Effect::Edit)).await;
    c.call("DELETE", t, &format!("{p}/saved-queries/adults"), Payload::None, Expect::Fail).await;

    // Sandbox evaluation.
    let t = "/projects/{id}/sandbox/eval";
    let u = format!("{p}/sandbox/eval");
    c.ok("POST", t, &u, json!({ "sql": "SELECT name FROM customers WHERE age >= 18 ORDER BY name;" }), Effect::Nothing).await;
    c.ok("POST", t, &u, json!({ "graph": "main" }), Effect::Nothing).await;
    c.bad("POST", t, &u, json!({ "sql": "SELECT shoe_size FROM customers;" })).await;
    c.bad("POST", t, &u, json!({ "graph": "empty" })).await;
    c.bad("POST", t, &u, json!({})).await;
    c.bad("POST", t, &u, json!({ "sql": "SELECT 1 FROM customers;", "graph": "main" })).await;
    c.malformed("POST", t, &u).await;

    // Graph removals.
    let t = "/projects/{id}/graphs/{graph}/disconnect";
    let u = format!("{g}/disconnect");
    c.ok("POST", t, &u, json!({ "from": 3, "to": 1 }), Effect::Edit).await;
    c.bad("POST", t, &u, json!({ "from": 3, "to": 1 })).await;
    c.malformed("POST", t, &u).await;
    let t = "/projects/{id}/graphs/{graph}/remove-element";
    let u = format!("{g}/remove-element");
    c.ok("POST", t, &u, json!({ "element": 3 }), Effect::Edit).await;
    let t = "/projects/{id}/graphs/{graph}";
    c.call("DELETE", t, &format!("{p}/graphs/empty"), Payload::None, Expect::Ok(Effect::Edit)).await;
    c.call("DELETE", t, &format!("{p}/graphs/empty"), Payload::None, Expect::Fail).await;

    // History.
    let t = "/projects/{id}/history";
    c.get(t, &format!("{p}/history?limit=5&offset=1")).await;
    c.get(t, &format!("{p}/history")).await;
    c.call("GET", t, &format!("{p}/history?limit=abc"), Payload::None, Expect::Fail).await;
    let undo = "/projects/{id}/history/undo";
    let redo = "/projects/{id}/history/redo";
    c.call("POST", redo, &format!("{p}/history/redo"), Payload::None, Expect::Fail).await;
    c.call("POST", undo, &format!("{p}/history/undo"), Payload::None, Expect::Ok(Effect::Undo)).await;
    c.call("POST", undo, &format!("{p}/history/undo"), Payload::None, Expect::Ok(Effect::Undo)).await;
    c.call("POST", redo, &format!("{p}/history/redo"), Payload::None, Expect::Ok(Effect::Redo)).await;
    let fresh = c.app.new_project(&c.token, "blank").await;
    c.call("POST", undo, &format!("/projects/{fresh}/history/undo"), Payload::None, Expect::Fail).await;

    // Drops.
    let t = "/projects/{id}/ddl/drop";
    let u = format!("{p}/ddl/drop");
    c.ok("POST", t, &u, json!({ "kind": "index", "name": "customers_age_idx" }), Effect::Edit).await;
    c.ok("POST", t, &u, json!({ "kind": "trigger", "name": "audit_customers" }), Effect::Edit).await;
    c.bad("POST", t, &u, json!({ "kind": "table", "name": "ghosts" })).await;
    c.bad("POST", t, &u, json!({ "kind": "view", "name": "v" })).await;
    c.bad("POST", t, &u, json!({ "kind": "schema", "name": "public" })).await;
    c.malformed("POST", t, &u).await;

    // Project removal and sign-out.
    let t = "/projects/{id}";
    c.call("DELETE", t, &format!("/projects/{imported_id}"), Payload::None, Expect::Ok(Effect::Lifecycle)).await;
    c.call("DELETE", t, &format!("/projects/{imported_id}"), Payload::None, Expect::Fail).await;
    c.call("DELETE", t, &format!("/projects/{fresh}"), Payload::None, Expect::Ok(Effect::Lifecycle)).await;

    // Unknown paths and methods.
    c.call("GET", "(fallback)", "/no-such-endpoint", Payload::None, Expect::Fail).await;
    c.call("PATCH", "(fallback)", "/projects", Payload::None, Expect::Fail).await;
    c.call("GET", "(fallback)", "/projects/import", Payload::None, Expect::Fail).await;

    // Every non-public route refuses missing, unknown and expired tokens alike.
    let stale = TestApp::with_config(ServiceConfig { session_ttl: chrono::Duration::zero(), ..ServiceConfig::default() });
    stale.ok("POST", "/auth/register", None, json!({ "username": "ana", "password": "pw" })).await;
    let expired = stale.ok("POST", "/auth/login", None, json!({ "username": "ana", "password": "pw" })).await.payload["token"].as_str().unwrap().to_string();
    for route in ROUTES.iter().filter(|r| r.kind != RouteKind::Public && r.path != "/auth/register") {
        let path = route.path.replace("{id}", &id).replace("{graph}", "main").replace("{name}", "x");
        let body = || Payload::Json(json!({}));
        let (c0, missing) = app.call(route.method, &path, None, body()).await;
        let (c1, unknown) = app.call(route.method, &path, Some("not-a-token"), body()).await;
        let (c2, old) = stale.call(route.method, &path, Some(&expired), body()).await;
        c.report.unauthenticated_checks += 1;
        let same = c0 == StatusCode::UNAUTHORIZED && c0 == c1 && c1 == c2 && missing == unknown && unknown == old;
        if !same || missing.feedback.is_empty() {
            c.fail(format!("{} {}: token rejections differ ({c0}, {c1}, {c2})", route.method, route.path));
        }
    }
    // Signing out ends the session.
    let t = "/auth/logout";
    let before = c.token.clone();
    c.ok("POST", t, t, json!(null), Effect::Nothing).await;
    let (code, _) = app.call("GET", "/projects", Some(&before), Payload::None).await;
    if code != StatusCode::UNAUTHORIZED {
        c.fail(format!("the session still works after signing out: {code}"));
    }

    for r in ROUTES {
        if !c.covered.contains(&(r.method.to_string(), r.path.to_string())) {
            c.report.uncovered.push(format!("{} {}", r.method, r.path));
        }
    }
    let _ = expected_effect;
    c.report
}
