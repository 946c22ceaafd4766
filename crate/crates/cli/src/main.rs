//! Command-line front end: runs the HTTP service or one engine operation.

use std::io::{Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pgstudio_core::advisor::{analyze_source, compare_plans, plan, TableStats};
use pgstudio_core::catalog::SchemaCatalog;
use pgstudio_core::completion::{complete, generate_from_pseudocode, parse_pseudocode};
use pgstudio_core::eval::{eval, MiniDb};
use pgstudio_core::sql::{explain_error, parse_select, render_select};
use pgstudio_core::workspace::{load_project, Project};
use pgstudio_service::{api_reference, AppState, PostgresExplain, ServiceConfig};

#[derive(Parser)]
#[command(name = "pgstudio", version, about = "PostgreSQL learning and query-building environment")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Parse a SELECT statement and print its syntax tree.
    Parse(Input),
    /// Parse a SELECT statement and print its canonical text.
    Render(Input),
    /// List optimization advice for a query.
    Analyze(WithProject),
    /// Compare candidate evaluation orders for a query.
    Plan {
        #[command(flatten)]
        query: WithProject,
        /// Row count of a table, as TABLE=ROWS. Repeatable.
        #[arg(long = "rows", value_name = "TABLE=ROWS")]
        rows: Vec<String>,
    },
    /// Suggest completions at a byte offset.
    Complete {
        #[command(flatten)]
        query: WithProject,
        /// Byte offset of the cursor; defaults to the end of the text.
        #[arg(long)]
        cursor: Option<usize>,
    },
    /// Turn pseudo-code such as "get name from customers" into SQL.
    Pseudo(WithProject),
    /// Run a query against a small in-memory database.
    Eval {
        #[command(flatten)]
        query: WithProject,
        /// A database fixture file; defaults to the project's sandbox.
        #[arg(long)]
        db: Option<PathBuf>,
    },
    /// Print the HTTP route table.
    ApiReference,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080", env = "PGSTUDIO_LISTEN")]
    listen: SocketAddr,
    /// Directory for accounts and projects; without it nothing is kept.
    #[arg(long, env = "PGSTUDIO_STORAGE_DIR")]
    storage_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 24, env = "PGSTUDIO_SESSION_TTL_HOURS")]
    session_ttl_hours: i64,
    /// Server used for EXPLAIN ANALYZE, e.g. postgres://user@localhost/db.
    #[arg(long, env = "PGSTUDIO_POSTGRES_URL")]
    postgres_url: Option<String>,
    /// Browser origin allowed to call the service.
    #[arg(long, env = "PGSTUDIO_CORS_ORIGIN")]
    cors_origin: Option<String>,
}

#[derive(Args)]
struct Input {
    /// The query text; read from stdin when omitted or "-".
    sql: Option<String>,
}

#[derive(Args)]
struct WithProject {
    #[command(flatten)]
    input: Input,
    /// A project file whose catalog and sandbox are used.
    #[arg(long)]
    project: Option<PathBuf>,
}

impl Input {
    fn text(&self) -> Result<String> {
        match self.sql.as_deref() {
            Some(s) if s != "-" => Ok(s.to_string()),
            _ => {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
                Ok(s)
            }
        }
    }
}

impl WithProject {
    fn project(&self) -> Result<Option<Project>> {
        let Some(path) = &self.project else { return Ok(None) };
        let text = read(path)?;
        Ok(Some(load_project(&text).with_context(|| format!("loading {}", path.display()))?))
    }

    fn catalog(&self) -> Result<SchemaCatalog> {
        Ok(self.project()?.map(|p| p.catalog).unwrap_or_default())
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn parse(text: &str) -> Result<pgstudio_core::sql::SelectAst> {
    parse_select(text).map_err(|e| anyhow::anyhow!(explain_error(&e, text)))
}

fn print(as_json: bool, value: serde_json::Value, text: impl FnOnce() -> String) {
    emit(&if as_json { serde_json::to_string_pretty(&value).unwrap_or_default() } else { text() });
}

/// A closed pipe (e.g. `| head`) ends the process quietly instead of panicking.
fn emit(out: &str) {
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = writeln!(stdout, "{out}").and_then(|_| stdout.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing output: {e}");
        std::process::exit(1);
    }
}

fn stats(rows: &[String]) -> Result<Vec<TableStats>> {
    rows.iter()
        .map(|r| {
            let Some((table, n)) = r.split_once('=') else { bail!("--rows takes TABLE=ROWS, got {r}") };
            Ok(TableStats::new(table, n.parse().with_context(|| format!("row count in {r}"))?))
        })
        .collect()
}

async fn serve(a: ServeArgs) -> Result<()> {
    let config = ServiceConfig { session_ttl: chrono::Duration::hours(a.session_ttl_hours), storage_dir: a.storage_dir, cors_origin: a.cors_origin };
    let mut state = AppState::open(config)?;
    if let Some(url) = a.postgres_url {
        state = state.with_explain(Arc::new(PostgresExplain::new(url)));
    }
    pgstudio_service::serve(Arc::new(state), a.listen).await?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let j = cli.json;
    match cli.command {
        Command::Serve(a) => {
            tracing_subscriber::fmt().with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into())).init();
            tokio::runtime::Runtime::new()?.block_on(serve(a))?;
        }
        Command::Parse(i) => {
            let ast = parse(&i.text()?)?;
            let v = serde_json::to_value(&ast)?;
            print(true, v, String::new);
        }
        Command::Render(i) => {
            let c = render_select(&parse(&i.text()?)?)?;
            print(j, serde_json::to_value(&c)?, || c.text.clone());
        }
        Command::Analyze(q) => {
            let text = q.input.text()?;
            let (_, diags) = analyze_source(&text, &q.catalog()?).map_err(|e| anyhow::anyhow!(explain_error(&e, &text)))?;
            print(j, serde_json::to_value(&diags)?, || {
                if diags.is_empty() {
                    return "No advice for this query.".into();
                }
                diags
                    .iter()
                    .map(|d| {
                        let rewrite = d.rewrite_sql.as_deref().map(|s| format!("\n  instead: {s}")).unwrap_or_default();
                        format!("{} [{}..{}] {}: {}{rewrite}", d.rule.title(), d.span.start, d.span.end, serde_json::to_value(d.equivalence).unwrap_or_default().as_str().unwrap_or_default(), d.message)
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            });
        }
        Command::Plan { query, rows } => {
            let ast = parse(&query.input.text()?)?;
            let (catalog, stats) = (query.catalog()?, stats(&rows)?);
            let report = plan(&ast, &catalog, &stats)?;
            let text = compare_plans(&ast, &catalog, &stats)?;
            print(j, serde_json::to_value(&report)?, || text);
        }
        Command::Complete { query, cursor } => {
            let text = query.input.text()?;
            let text = text.strip_suffix('\n').unwrap_or(&text);
            let got = complete(text, cursor.unwrap_or(text.len()), &query.catalog()?);
            print(j, serde_json::to_value(&got)?, || got.iter().map(|c| format!("{:<24} {}", c.text, c.explanation)).collect::<Vec<_>>().join("\n"));
        }
        Command::Pseudo(q) => {
            let pq = parse_pseudocode(q.input.text()?.trim())?;
            let g = generate_from_pseudocode(&pq, &q.catalog()?);
            print(j, json!({ "sql": g.sql.text, "warnings": g.warnings }), || g.warnings.iter().map(|w| format!("warning: {w}\n")).collect::<String>() + &g.sql.text);
        }
        Command::Eval { query, db } => {
            let ast = parse(&query.input.text()?)?;
            let db: MiniDb = match (db, query.project()?) {
                (Some(path), _) => MiniDb::from_json(&read(&path)?).with_context(|| format!("reading database {}", path.display()))?,
                (None, Some(p)) => p.sandbox,
                (None, None) => bail!("eval needs --db or --project"),
            };
            db.check()?;
            let rel = eval(&ast, &db)?;
            print(j, serde_json::to_value(&rel)?, || {
                let mut out = rel.columns.join(" | ");
                for row in &rel.rows {
                    out.push('\n');
                    out.push_str(&row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" | "));
                }
                out.push_str(&format!("\n({} rows)", rel.rows.len()));
                out
            });
        }
        Command::ApiReference => emit(&api_reference()),
    }
    Ok(())
}
