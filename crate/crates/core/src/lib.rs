//! Engine for a PostgreSQL learning and query-building environment.
//!
//! Queries move through one pipeline: a visual [`graph::QueryGraph`] lowers
//! to a [`sql::SelectAst`], which renders to canonical SQL text and parses
//! back to the same tree. The [`advisor`] rewrites and costs trees against a
//! [`catalog::SchemaCatalog`], the [`eval`] module runs them over small
//! in-memory databases, and [`workspace`] records every edit as an undoable
//! history entry.

pub mod sql;
pub mod catalog;
pub mod eval;
pub mod graph;
pub mod advisor;
pub mod completion;
pub mod workspace;
