//! Optional pass-through of EXPLAIN ANALYZE to a live PostgreSQL server.

use std::future::Future;
use std::pin::Pin;

pub type ExplainFuture<'a> = Pin<Box<dyn Future<Output = Result<String, String>> + Send + 'a>>;

/// Returns the server's plan text for a canonical SELECT statement.
pub trait ExplainProxy: Send + Sync {
    fn explain<'a>(&'a self, sql: &'a str) -> ExplainFuture<'a>;
}

/// Connects per request and runs the statement inside a read-only
/// transaction that is always rolled back.
#[derive(Debug, Clone)]
pub struct PostgresExplain {
    url: String,
}

impl PostgresExplain {
    pub fn new(url: impl Into<String>) -> Self {
        PostgresExplain { url: url.into() }
    }
}

impl ExplainProxy for PostgresExplain {
    fn explain<'a>(&'a self, sql: &'a str) -> ExplainFuture<'a> {
        Box::pin(async move {
            let (client, connection) = tokio_postgres::connect(&self.url, tokio_postgres::NoTls).await.map_err(|e| format!("could not reach the PostgreSQL server: {e}"))?;
            let driver = tokio::spawn(connection);
            let statement = format!("EXPLAIN ANALYZE {}", sql.trim_end().trim_end_matches(';'));
            let run = async {
                client.batch_execute("BEGIN READ ONLY").await?;
                let out = client.simple_query(&statement).await;
                client.batch_execute("ROLLBACK").await?;
                out
            };
            let messages = run.await.map_err(|e| format!("the server rejected EXPLAIN: {e}"));
            drop(client);
            driver.abort();
            let lines: Vec<String> = messages?
                .into_iter()
                .filter_map(|m| match m {
                    tokio_postgres::SimpleQueryMessage::Row(r) => r.get(0).map(str::to_string),
                    _ => None,
                })
                .collect();
            Ok(lines.join("\n"))
        })
    }
}
