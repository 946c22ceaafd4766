use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Project;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum StoreError {
    #[error("no project with id {id} belongs to you")]
    ProjectNotFound { id: String },
    #[error("a project with id {id} already exists")]
    DuplicateProject { id: String },
}

/// Projects keyed by `(owner, id)`; every lookup needs the owner, so one
/// user cannot reach another user's projects.
#[derive(Debug, Clone, Default)]
pub struct ProjectStore {
    projects: BTreeMap<(String, String), Project>,
}

impl ProjectStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create(&mut self, owner: &str, name: &str) -> &Project {
        let id = uuid::Uuid::new_v4().to_string();
        let key = (owner.to_string(), id.clone());
        self.projects.entry(key).or_insert_with(|| Project::new(&id, owner, name))
    }

    pub fn insert(&mut self, project: Project) -> Result<(), StoreError> {
        let key = (project.owner.clone(), project.id.clone());
        if self.projects.contains_key(&key) {
            return Err(StoreError::DuplicateProject { id: project.id });
        }
        self.projects.insert(key, project);
        Ok(())
    }

    pub fn get(&self, owner: &str, id: &str) -> Result<&Project, StoreError> {
        self.projects.get(&(owner.to_string(), id.to_string())).ok_or_else(|| StoreError::ProjectNotFound { id: id.into() })
    }

    pub fn get_mut(&mut self, owner: &str, id: &str) -> Result<&mut Project, StoreError> {
        self.projects.get_mut(&(owner.to_string(), id.to_string())).ok_or_else(|| StoreError::ProjectNotFound { id: id.into() })
    }

    pub fn remove(&mut self, owner: &str, id: &str) -> Result<Project, StoreError> {
        self.projects.remove(&(owner.to_string(), id.to_string())).ok_or_else(|| StoreError::ProjectNotFound { id: id.into() })
    }

    /// The owner's projects, sorted by id.
    pub fn list(&self, owner: &str) -> Vec<&Project> {
        self.projects.iter().filter(|((o, _), _)| o == owner).map(|(_, p)| p).collect()
    }
}
