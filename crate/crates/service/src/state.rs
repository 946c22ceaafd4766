//! Shared service state: accounts, sessions and per-project locks, with
//! optional persistence to a storage directory.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::FromRequestParts;
use axum::http::request::Parts;
use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

use pgstudio_core::workspace::{
    load_project, save_project, ActionEntry, DocumentError, Mutation, PasswordDigester, Project, SaltedSha256, StoredAccount, UserDirectory, UserError,
};

use crate::explain::ExplainProxy;
use crate::response::ApiError;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// A session ends after this long without a request.
    pub session_ttl: Duration,
    /// Projects and accounts are kept in memory only when unset.
    pub storage_dir: Option<PathBuf>,
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { session_ttl: Duration::hours(24), storage_dir: None, cors_origin: None }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("cannot use storage directory {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("stored project {path} cannot be loaded: {source}")]
    Project { path: PathBuf, source: DocumentError },
    #[error("stored accounts in {path} cannot be loaded: {message}")]
    Accounts { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub token: String,
    pub username: String,
    pub expires: DateTime<Utc>,
}

/// What the API reports about a project after each call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub id: String,
    pub name: String,
    pub owner: String,
    pub state_hash: String,
    pub history_length: usize,
    pub redo_length: usize,
    pub graphs: Vec<String>,
    pub saved_queries: Vec<String>,
}

impl ProjectSummary {
    pub fn of(p: &Project) -> Self {
        ProjectSummary {
            id: p.id.clone(),
            name: p.name.clone(),
            owner: p.owner.clone(),
            state_hash: p.state_hash(),
            history_length: p.history.entries.len(),
            redo_length: p.history.redo.len(),
            graphs: p.graphs.keys().cloned().collect(),
            saved_queries: p.saved_queries.keys().cloned().collect(),
        }
    }
}

/// The outcome of one recorded edit.
#[derive(Debug, Clone)]
pub struct Applied<T> {
    pub entry: ActionEntry,
    pub summary: ProjectSummary,
    pub value: T,
}

type ProjectKey = (String, String);

/// Each project sits behind its own lock: edits to one project are applied
/// one at a time, reads share the lock, and distinct projects never wait on
/// each other.
pub struct AppState {
    pub config: ServiceConfig,
    users: std::sync::Mutex<UserDirectory>,
    sessions: std::sync::Mutex<HashMap<String, Session>>,
    projects: std::sync::RwLock<BTreeMap<ProjectKey, Arc<RwLock<Project>>>>,
    pub explain: Option<Arc<dyn ExplainProxy>>,
    /// Serializes writes of the accounts file.
    accounts_file: tokio::sync::Mutex<()>,
}

impl std::fmt::Debug for AppState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AppState").field("config", &self.config).finish_non_exhaustive()
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StartupError + '_ {
    move |source| StartupError::Io { path: path.to_path_buf(), source }
}

impl AppState {
    /// In-memory state with the given password digester.
    pub fn with_digester(config: ServiceConfig, digester: Box<dyn PasswordDigester>) -> Self {
        AppState {
            config,
            users: std::sync::Mutex::new(UserDirectory::new(digester)),
            sessions: Default::default(),
            projects: Default::default(),
            explain: None,
            accounts_file: Default::default(),
        }
    }

    /// Opens the storage directory, loading any accounts and projects in it.
    pub fn open(config: ServiceConfig) -> Result<Self, StartupError> {
        let Some(dir) = config.storage_dir.clone() else {
            return Ok(Self::with_digester(config, Box::new(SaltedSha256)));
        };
        std::fs::create_dir_all(dir.join("projects")).map_err(io(&dir))?;
        let accounts = dir.join("accounts.json");
        let users = if accounts.exists() {
            let text = std::fs::read_to_string(&accounts).map_err(io(&accounts))?;
            let records: Vec<StoredAccount> = serde_json::from_str(&text).map_err(|e| StartupError::Accounts { path: accounts.clone(), message: e.to_string() })?;
            UserDirectory::from_records(records, Box::new(SaltedSha256)).map_err(|e| StartupError::Accounts { path: accounts.clone(), message: e.to_string() })?
        } else {
            UserDirectory::new(Box::new(SaltedSha256))
        };
        let mut projects = BTreeMap::new();
        let owners = dir.join("projects");
        for owner in std::fs::read_dir(&owners).map_err(io(&owners))? {
            let owner = owner.map_err(io(&owners))?.path();
            if !owner.is_dir() {
                continue;
            }
            for file in std::fs::read_dir(&owner).map_err(io(&owner))? {
                let path = file.map_err(io(&owner))?.path();
                if path.extension().is_none_or(|e| e != "json") {
                    continue;
                }
                let text = std::fs::read_to_string(&path).map_err(io(&path))?;
                let p = load_project(&text).map_err(|source| StartupError::Project { path: path.clone(), source })?;
                projects.insert((p.owner.clone(), p.id.clone()), Arc::new(RwLock::new(p)));
            }
        }
        let mut state = Self::with_digester(config, Box::new(SaltedSha256));
        state.users = std::sync::Mutex::new(users);
        state.projects = std::sync::RwLock::new(projects);
        Ok(state)
    }

    pub fn with_explain(mut self, proxy: Arc<dyn ExplainProxy>) -> Self {
        self.explain = Some(proxy);
        self
    }

    pub async fn register(&self, new: pgstudio_core::workspace::NewUser) -> Result<pgstudio_core::workspace::UserProfile, ApiError> {
        // Held across the write so the file never goes back to an older list.
        let _guard = self.accounts_file.lock().await;
        let (profile, records) = {
            let mut users = self.users.lock().expect("user directory lock");
            let profile = users.create_user(new)?;
            (profile, users.to_records())
        };
        if let Some(dir) = &self.config.storage_dir {
            let text = serde_json::to_string_pretty(&records).expect("accounts serialize");
            write_atomic(&dir.join("accounts.json"), &text).await?;
        }
        Ok(profile)
    }

    pub fn login(&self, username: &str, password: &str) -> Result<Session, UserError> {
        self.users.lock().expect("user directory lock").authenticate(username, password)?;
        let session = Session { token: uuid::Uuid::new_v4().simple().to_string(), username: username.to_string(), expires: Utc::now() + self.config.session_ttl };
        self.sessions.lock().expect("session lock").insert(session.token.clone(), session.clone());
        Ok(session)
    }

    pub fn logout(&self, token: &str) {
        self.sessions.lock().expect("session lock").remove(token);
    }

    /// The user behind `token`, extending the session's idle deadline.
    pub fn authenticate(&self, token: &str) -> Option<String> {
        let now = Utc::now();
        let mut sessions = self.sessions.lock().expect("session lock");
        sessions.retain(|_, s| s.expires > now);
        let s = sessions.get_mut(token)?;
        s.expires = now + self.config.session_ttl;
        Some(s.username.clone())
    }

    fn project_path(&self, owner: &str, id: &str) -> Option<PathBuf> {
        self.config.storage_dir.as_ref().map(|d| d.join("projects").join(owner).join(format!("{id}.json")))
    }

    async fn persist(&self, p: &Project) -> Result<(), ApiError> {
        if let Some(path) = self.project_path(&p.owner, &p.id) {
            write_atomic(&path, &save_project(p, true)).await?;
        }
        Ok(())
    }

    pub async fn insert_project(&self, p: Project) -> Result<ProjectSummary, ApiError> {
        let key = (p.owner.clone(), p.id.clone());
        if self.projects.read().expect("project map lock").contains_key(&key) {
            return Err(pgstudio_core::workspace::StoreError::DuplicateProject { id: p.id }.into());
        }
        self.persist(&p).await?;
        let summary = ProjectSummary::of(&p);
        self.projects.write().expect("project map lock").insert(key, Arc::new(RwLock::new(p)));
        Ok(summary)
    }

    pub async fn remove_project(&self, owner: &str, id: &str) -> Result<Project, ApiError> {
        let handle = self.projects.write().expect("project map lock").remove(&(owner.to_string(), id.to_string())).ok_or_else(|| not_found(id))?;
        // Wait for any edit in flight before deleting the file.
        let p = handle.write().await.clone();
        if let Some(path) = self.project_path(owner, id) {
            match tokio::fs::remove_file(&path).await {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(ApiError::internal(format!("The project was removed but its file could not be deleted: {e}."))),
            }
        }
        Ok(p)
    }

    pub fn list_projects(&self, owner: &str) -> Vec<Arc<RwLock<Project>>> {
        self.projects.read().expect("project map lock").iter().filter(|((o, _), _)| o == owner).map(|(_, p)| p.clone()).collect()
    }

    fn handle(&self, owner: &str, id: &str) -> Result<Arc<RwLock<Project>>, ApiError> {
        self.projects.read().expect("project map lock").get(&(owner.to_string(), id.to_string())).cloned().ok_or_else(|| not_found(id))
    }

    /// Runs `f` on a shared view of the project.
    pub async fn read<T>(&self, owner: &str, id: &str, f: impl FnOnce(&Project) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let handle = self.handle(owner, id)?;
        let p = handle.read().await;
        f(&p)
    }

    /// Builds a mutation from the current state and records it. This is the
    /// only path by which the API changes a project.
    pub async fn mutate(&self, owner: &str, id: &str, build: impl FnOnce(&Project) -> Result<Mutation, ApiError>) -> Result<Applied<()>, ApiError> {
        self.mutate_then(owner, id, build, |_| ()).await
    }

    /// Like `mutate`, also reading `after` from the edited project.
    pub async fn mutate_then<T>(
        &self,
        owner: &str,
        id: &str,
        build: impl FnOnce(&Project) -> Result<Mutation, ApiError>,
        after: impl FnOnce(&Project) -> T,
    ) -> Result<Applied<T>, ApiError> {
        let handle = self.handle(owner, id)?;
        let mut p = handle.write().await;
        let m = build(&p)?;
        let entry = p.record_and_apply(owner, m)?;
        self.persist(&p).await?;
        Ok(Applied { entry, summary: ProjectSummary::of(&p), value: after(&p) })
    }

    pub async fn undo(&self, owner: &str, id: &str) -> Result<Applied<()>, ApiError> {
        self.step(owner, id, true).await
    }

    pub async fn redo(&self, owner: &str, id: &str) -> Result<Applied<()>, ApiError> {
        self.step(owner, id, false).await
    }

    async fn step(&self, owner: &str, id: &str, back: bool) -> Result<Applied<()>, ApiError> {
        let handle = self.handle(owner, id)?;
        let mut p = handle.write().await;
        let entry = if back { p.undo() } else { p.redo() }.map_err(ApiError::from)?.clone();
        self.persist(&p).await?;
        Ok(Applied { entry, summary: ProjectSummary::of(&p), value: () })
    }
}

fn not_found(id: &str) -> ApiError {
    pgstudio_core::workspace::StoreError::ProjectNotFound { id: id.to_string() }.into()
}

async fn write_atomic(path: &Path, text: &str) -> Result<(), ApiError> {
    let fail = |e: std::io::Error| ApiError::internal(format!("The change could not be saved to disk: {e}."));
    if let Some(parent) = path.parent() {
        tokio::fs::create_dir_all(parent).await.map_err(fail)?;
    }
    let tmp = path.with_extension("json.tmp");
    tokio::fs::write(&tmp, text).await.map_err(fail)?;
    tokio::fs::rename(&tmp, path).await.map_err(fail)
}

/// The signed-in user, taken from `Authorization: Bearer <token>`.
/// Missing, unknown and expired tokens are rejected with the same answer.
#[derive(Debug, Clone)]
pub struct User(pub String);

impl FromRequestParts<Arc<AppState>> for User {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Arc<AppState>) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(axum::http::header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(ApiError::unauthorized)?;
        state.authenticate(token).map(User).ok_or_else(ApiError::unauthorized)
    }
}
