//! HTTP service for the pgstudio engine. Every endpoint wraps one engine
//! operation and answers with [`ApiResponse`]; every project edit goes
//! through the project's history.

pub mod context;
pub mod explain;
mod handlers;
pub mod response;
pub mod routes;
pub mod state;

use std::sync::Arc;

use axum::http::{header, HeaderValue, Method};
use axum::Router;
use tower_http::cors::CorsLayer;
use tower_http::trace::TraceLayer;

pub use context::{context_actions, ContextAction, ContextError};
pub use explain::{ExplainProxy, PostgresExplain};
pub use response::{ApiError, ApiResponse, Status};
pub use routes::{api_reference, RouteInfo, RouteKind, ROUTES};
pub use state::{AppState, ProjectSummary, ServiceConfig, StartupError};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("the CORS origin {0:?} is not a valid header value")]
    BadOrigin(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The full application: routes, CORS for the studio origin and request tracing.
pub fn app(state: Arc<AppState>) -> Result<Router, ServeError> {
    let cors = state.config.cors_origin.clone();
    let mut router = routes::router(state).layer(TraceLayer::new_for_http());
    if let Some(origin) = cors {
        let value = HeaderValue::from_str(&origin).map_err(|_| ServeError::BadOrigin(origin.clone()))?;
        let layer = CorsLayer::new()
            .allow_origin(value)
            .allow_methods([Method::GET, Method::POST, Method::PUT, Method::DELETE])
            .allow_headers([header::AUTHORIZATION, header::CONTENT_TYPE]);
        router = router.layer(layer);
    }
    Ok(router)
}

/// Serves until the process is stopped.
pub async fn serve(state: Arc<AppState>, addr: std::net::SocketAddr) -> Result<(), ServeError> {
    let router = app(state)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router).await?;
    Ok(())
}
