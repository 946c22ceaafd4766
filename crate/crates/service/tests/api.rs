mod common;

use common::*;

#[tokio::test]
async fn crawl_gives_feedback_everywhere_and_records_every_edit() {
    let report = crawl().await;
    assert!(report.failures.is_empty(), "{:#?}", report.failures);
    assert!(report.uncovered.is_empty(), "{:#?}", report.uncovered);
    assert_eq!(report.history_growth, report.edits);
    assert!(report.calls > 150, "{}", report.calls);
}

use std::sync::Arc;

use pgstudio_service::{api_reference, AppState, ServiceConfig, Status, ROUTES};
use serde_json::json;

async fn project_with_graph(app: &TestApp) -> (String, String) {
    let token = app.sign_up("ana").await;
    let id = app.new_project(&token, "shop").await;
    app.ok("POST", &format!("/projects/{id}/graphs"), Some(&token), json!({ "name": "main" })).await;
    (token, id)
}

#[tokio::test]
async fn refused_connection_names_both_kinds_and_the_allowed_targets() {
    let app = TestApp::new();
    let (token, id) = project_with_graph(&app).await;
    let g = format!("/projects/{id}/graphs/main");
    app.ok("POST", &format!("{g}/drop-element"), Some(&token), json!({ "kind": "SELECT", "x": 400, "y": 100 })).await;
    app.ok("POST", &format!("{g}/drop-element"), Some(&token), json!({ "kind": "HAVING", "x": 100, "y": 100 })).await;
    let (code, r) = app.call("POST", &format!("{g}/connect"), Some(&token), Payload::Json(json!({ "from": 2, "to": 1 }))).await;
    assert_eq!(code, 422);
    assert_eq!(r.status, Status::Error);
    assert!(r.feedback.contains("HAVING") && r.feedback.contains("SELECT"), "{}", r.feedback);
    assert!(r.feedback.contains("GROUP BY"), "{}", r.feedback);
    let allowed = r.payload["allowed"].as_array().unwrap();
    assert!(!allowed.is_empty() && !allowed.contains(&json!("SELECT")), "{}", r.payload);
    app.ok("POST", &format!("{g}/drop-element"), Some(&token), json!({ "kind": "WHERE", "x": 100, "y": 300 })).await;
    app.ok("POST", &format!("{g}/drop-element"), Some(&token), json!({ "kind": "WHERE", "x": 200, "y": 300 })).await;
    let (_, r) = app.call("POST", &format!("{g}/connect"), Some(&token), Payload::Json(json!({ "from": 3, "to": 4 }))).await;
    assert!(r.feedback.contains("A WHERE element cannot be connected to a WHERE element"), "{}", r.feedback);
    assert!(r.feedback.contains("WHERE can connect to: SELECT"), "{}", r.feedback);
}

#[tokio::test]
async fn table_creation_answers_with_its_ddl() {
    let app = TestApp::new();
    let (token, id) = project_with_graph(&app).await;
    let body = json!({ "definition": { "schema": "public", "name": "customers", "columns": [
        { "name": "id", "data_type": "serial" }, { "name": "name", "data_type": "text" } ] } });
    let r = app.ok("POST", &format!("/projects/{id}/ddl/table"), Some(&token), body).await;
    assert!(r.feedback.starts_with("Table created."), "{}", r.feedback);
    let ddl = r.payload["result"]["ddl"].as_str().or(r.payload["ddl"].as_str()).unwrap_or_default().to_string();
    assert!(ddl.starts_with("CREATE TABLE"), "{}", r.payload);
    assert!(r.feedback.contains(&ddl));
    let bad = json!({ "definition": { "schema": "public", "name": "2items", "columns": [{ "name": "id", "data_type": "integer" }] } });
    let (code, r) = app.call("POST", &format!("/projects/{id}/ddl/table"), Some(&token), Payload::Json(bad)).await;
    assert_eq!(code, 422);
    assert!(r.feedback.contains("start with letters"), "{}", r.feedback);
}

#[tokio::test]
async fn context_actions_use_the_menu_labels() {
    let app = TestApp::new();
    let token = app.sign_up("ana").await;
    let (_, r) = app.call("GET", "/objects/context-actions?kind=database", Some(&token), Payload::None).await;
    let labels: Vec<_> = r.payload.as_array().unwrap().iter().map(|a| a["label"].as_str().unwrap().to_string()).collect();
    assert!(labels.contains(&"create new table".to_string()));
    assert!(labels.contains(&"view existing tables".to_string()));
    let (_, r) = app.call("GET", "/objects/context-actions?kind=table", Some(&token), Payload::None).await;
    let labels: Vec<_> = r.payload.as_array().unwrap().iter().map(|a| a["label"].as_str().unwrap().to_string()).collect();
    assert!(labels.contains(&"add columns".to_string()));
    assert!(labels.contains(&"drop table".to_string()));
}

#[tokio::test]
async fn sessions_expire_after_their_idle_limit() {
    let app = TestApp::with_config(ServiceConfig { session_ttl: chrono::Duration::milliseconds(50), ..ServiceConfig::default() });
    let token = app.sign_up("ana").await;
    let (code, _) = app.call("GET", "/projects", Some(&token), Payload::None).await;
    assert_eq!(code, 200);
    tokio::time::sleep(std::time::Duration::from_millis(120)).await;
    let (late, expired) = app.call("GET", "/projects", Some(&token), Payload::None).await;
    let (_, missing) = app.call("GET", "/projects", None, Payload::None).await;
    assert_eq!(late, 401);
    assert_eq!(expired, missing);
}

#[tokio::test]
async fn projects_and_accounts_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let config = || ServiceConfig { storage_dir: Some(dir.path().to_path_buf()), ..ServiceConfig::default() };
    let first = TestApp::from_state(Arc::new(AppState::open(config()).unwrap()));
    let (token, id) = project_with_graph(&first).await;
    first.ok("POST", &format!("/projects/{id}/graphs/main/drop-element"), Some(&token), json!({ "kind": "SELECT", "x": 10, "y": 10 })).await;
    let before = first.ok("GET", &format!("/projects/{id}"), Some(&token), json!(null)).await;
    drop(first);

    let second = TestApp::from_state(Arc::new(AppState::open(config()).unwrap()));
    let r = second.ok("POST", "/auth/login", None, json!({ "username": "ana", "password": "pw" })).await;
    let token = r.payload["token"].as_str().unwrap().to_string();
    let after = second.ok("GET", &format!("/projects/{id}"), Some(&token), json!(null)).await;
    assert_eq!(before.payload, after.payload);
    let r = second.ok("POST", &format!("/projects/{id}/history/undo"), Some(&token), json!(null)).await;
    assert!(r.feedback.contains("Undid"), "{}", r.feedback);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_edits_each_get_one_history_entry() {
    let app = TestApp::new();
    let (token, id) = project_with_graph(&app).await;
    let mut tasks = Vec::new();
    for i in 0..24 {
        let (app, token, id) = (app.clone(), token.clone(), id.clone());
        tasks.push(tokio::spawn(async move {
            let body = json!({ "kind": "TABLE", "x": 10 * i, "y": 20 });
            app.ok("POST", &format!("/projects/{id}/graphs/main/drop-element"), Some(&token), body).await
        }));
    }
    let mut sequences = Vec::new();
    for t in tasks {
        sequences.push(t.await.unwrap().payload["entry"]["sequence"].as_u64().unwrap());
    }
    sequences.sort();
    sequences.dedup();
    assert_eq!(sequences.len(), 24);
    let r = app.ok("GET", &format!("/projects/{id}"), Some(&token), json!(null)).await;
    assert_eq!(r.payload["history_length"], 25);
    let g = app.ok("GET", &format!("/projects/{id}/graphs/main"), Some(&token), json!(null)).await;
    assert_eq!(g.payload["elements"].as_array().unwrap().len(), 24);
}

#[test]
fn api_reference_lists_every_route() {
    let text = api_reference();
    for r in ROUTES {
        assert!(text.lines().any(|l| l.starts_with(&format!("{} {} ", r.method, r.path))), "{} {}", r.method, r.path);
    }
}
