//! The versioned project file.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{History, Project};
use crate::catalog::SchemaCatalog;
use crate::eval::MiniDb;
use crate::graph::QueryGraph;

pub const PROJECT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum DocumentError {
    #[error("project files of version {found} cannot be read; this build reads version {supported}")]
    UnsupportedVersion { found: u64, supported: u32 },
    #[error("the project file is damaged at {path}: {message}")]
    CorruptDocument { path: String, message: String },
}

#[derive(Serialize, Deserialize)]
struct NamedGraph {
    name: String,
    graph: QueryGraph,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectDocument {
    version: u32,
    id: String,
    name: String,
    owner: String,
    catalog: SchemaCatalog,
    graphs: Vec<NamedGraph>,
    saved_queries: BTreeMap<String, String>,
    #[serde(default)]
    sandbox: Option<MiniDb>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    history: Option<History>,
}

/// Writes `project` as pretty JSON, with or without its history.
pub fn save_project(project: &Project, include_history: bool) -> String {
    let doc = ProjectDocument {
        version: PROJECT_VERSION,
        id: project.id.clone(),
        name: project.name.clone(),
        owner: project.owner.clone(),
        catalog: project.catalog.clone(),
        graphs: project.graphs.iter().map(|(name, graph)| NamedGraph { name: name.clone(), graph: graph.clone() }).collect(),
        saved_queries: project.saved_queries.clone(),
        sandbox: Some(project.sandbox.clone()),
        history: include_history.then(|| project.history.clone()),
    };
    serde_json::to_string_pretty(&doc).expect("projects serialize")
}

fn corrupt(path: impl Into<String>, message: impl ToString) -> DocumentError {
    DocumentError::CorruptDocument { path: path.into(), message: message.to_string() }
}

fn from_path_error(e: serde_path_to_error::Error<serde_json::Error>) -> DocumentError {
    let path = e.path().to_string();
    let path = if path == "." { "(document)".to_string() } else { path };
    corrupt(path, e.into_inner())
}

pub fn load_project(text: &str) -> Result<Project, DocumentError> {
    let value: serde_json::Value = match serde_json::from_str(text) {
        Ok(v) => v,
        // Re-read with path tracking to report where the text breaks off.
        Err(_) => {
            let de = &mut serde_json::Deserializer::from_str(text);
            return Err(match serde_path_to_error::deserialize::<_, ProjectDocument>(de) {
                Err(e) => from_path_error(e),
                Ok(_) => corrupt("(document)", "trailing characters"),
            });
        }
    };
    match value.get("version") {
        None => return Err(corrupt("version", "missing field `version`")),
        Some(v) => match v.as_u64() {
            Some(n) if n == u64::from(PROJECT_VERSION) => {}
            Some(n) => return Err(DocumentError::UnsupportedVersion { found: n, supported: PROJECT_VERSION }),
            None => return Err(corrupt("version", format!("expected a whole number, found {v}"))),
        },
    }
    let doc: ProjectDocument = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        corrupt(if path == "." { "(document)".to_string() } else { path }, e.into_inner())
    })?;
    let mut graphs = BTreeMap::new();
    for (i, g) in doc.graphs.into_iter().enumerate() {
        if graphs.insert(g.name.clone(), g.graph).is_some() {
            return Err(corrupt(format!("graphs[{i}].name"), format!("graph name “{}” appears twice", g.name)));
        }
    }
    let sandbox = doc.sandbox.unwrap_or_default();
    sandbox.check().map_err(|e| corrupt("sandbox", e))?;
    let history = doc.history.unwrap_or(History { next_sequence: 1, ..History::default() });
    Ok(Project { id: doc.id, name: doc.name, owner: doc.owner, catalog: doc.catalog, graphs, saved_queries: doc.saved_queries, sandbox, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ElementKind;
    use crate::workspace::Mutation;

    fn sample() -> Project {
        let mut p = Project::new("p1", "ana", "demo");
        for name in ["main", "other"] {
            p.record_and_apply("ana", Mutation::CreateGraph { name: name.into() }).unwrap();
            p.record_and_apply("ana", Mutation::DropElement { graph: name.into(), kind: ElementKind::Select, x: 1, y: 2 }).unwrap();
        }
        p.record_and_apply("ana", Mutation::SaveQuery { name: "q".into(), sql: "SELECT 1 FROM t;".into() }).unwrap();
        p
    }

    #[test]
    fn round_trip() {
        let p = sample();
        let with = load_project(&save_project(&p, true)).unwrap();
        assert_eq!(with, p);
        let without = load_project(&save_project(&p, false)).unwrap();
        assert_eq!(without.state_hash(), p.state_hash());
        assert!(without.history.entries.is_empty());
    }

    #[test]
    fn unsupported_version() {
        let text = save_project(&sample(), false).replacen("\"version\": 1", "\"version\": 99", 1);
        assert_eq!(load_project(&text).unwrap_err(), DocumentError::UnsupportedVersion { found: 99, supported: 1 });
    }

    #[test]
    fn truncated_names_path() {
        let text = save_project(&sample(), false);
        let cut = &text[..text.find("\"saved_queries\"").unwrap() - 20];
        let DocumentError::CorruptDocument { path, .. } = load_project(cut).unwrap_err() else { panic!() };
        assert!(path.starts_with("graphs"), "{path}");
    }

    #[test]
    fn wrong_type_names_path() {
        let text = save_project(&sample(), false).replacen("\"owner\": \"ana\"", "\"owner\": 5", 1);
        assert!(matches!(load_project(&text).unwrap_err(), DocumentError::CorruptDocument { ref path, .. } if path == "owner"));
    }
}
