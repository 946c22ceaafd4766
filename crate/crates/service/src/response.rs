//! The uniform response envelope and the error type every handler returns.

use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use pgstudio_core::advisor::{AdvisorError, PlanError};
use pgstudio_core::catalog::{CatalogError, IdentifierError, UnknownDataType};
use pgstudio_core::completion::PseudoError;
use pgstudio_core::eval::{EvalError, FixtureError};
use pgstudio_core::graph::{GraphError, LowerError};
use pgstudio_core::sql::{explain_error, ParseError, RenderError};
use pgstudio_core::workspace::{DocumentError, StoreError, UserError, WorkspaceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Error,
}

/// Every endpoint answers with this body. `feedback` is never empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiResponse {
    pub status: Status,
    pub feedback: String,
    #[serde(default)]
    pub payload: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Vec<Value>>,
}

/// A successful answer: HTTP 200 with a feedback message and a payload.
#[derive(Debug)]
pub struct Reply<T = Value> {
    pub feedback: String,
    pub payload: T,
    pub diagnostics: Option<Vec<Value>>,
}

impl<T> Reply<T> {
    pub fn new(feedback: impl Into<String>, payload: T) -> Self {
        Reply { feedback: feedback.into(), payload, diagnostics: None }
    }

    pub fn with_diagnostics(mut self, d: Vec<Value>) -> Self {
        self.diagnostics = Some(d);
        self
    }
}

impl<T: Serialize> IntoResponse for Reply<T> {
    fn into_response(self) -> Response {
        let payload = serde_json::to_value(&self.payload).unwrap_or(Value::Null);
        let feedback = if self.feedback.is_empty() { "Done.".to_string() } else { self.feedback };
        (StatusCode::OK, Json(ApiResponse { status: Status::Ok, feedback, payload, diagnostics: self.diagnostics })).into_response()
    }
}

/// An error answer. The feedback is the engine's message verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub code: StatusCode,
    pub feedback: String,
    pub payload: Value,
    pub diagnostics: Option<Vec<Value>>,
}

impl ApiError {
    pub fn new(code: StatusCode, feedback: impl Into<String>) -> Self {
        ApiError { code, feedback: feedback.into(), payload: Value::Null, diagnostics: None }
    }

    pub fn unprocessable(feedback: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, feedback)
    }

    pub fn not_found(feedback: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, feedback)
    }

    pub fn bad_request(feedback: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, feedback)
    }

    pub fn internal(feedback: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, feedback)
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "Sign in first: this request needs a valid session token, and the one given is missing or has expired.")
    }

    pub fn with_payload(mut self, payload: impl Serialize) -> Self {
        self.payload = serde_json::to_value(payload).unwrap_or(Value::Null);
        self
    }

    pub fn with_diagnostics(mut self, d: Vec<Value>) -> Self {
        self.diagnostics = Some(d);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let feedback = if self.feedback.is_empty() { "The request failed.".to_string() } else { self.feedback };
        (self.code, Json(ApiResponse { status: Status::Error, feedback, payload: self.payload, diagnostics: self.diagnostics })).into_response()
    }
}

pub type ApiResult<T = Value> = Result<Reply<T>, ApiError>;

fn engine<E: std::fmt::Display + Serialize>(code: StatusCode, e: &E) -> ApiError {
    ApiError::new(code, e.to_string()).with_payload(e)
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        let code = match e {
            GraphError::UnknownElement { .. } | GraphError::UnknownConnection { .. } => StatusCode::NOT_FOUND,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        engine(code, &e)
    }
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        let code = match e {
            CatalogError::Duplicate { .. } => StatusCode::CONFLICT,
            CatalogError::UnknownIndex { .. } | CatalogError::UnknownTrigger { .. } | CatalogError::UnknownDatabase { .. } => StatusCode::NOT_FOUND,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        engine(code, &e)
    }
}

impl From<IdentifierError> for ApiError {
    fn from(e: IdentifierError) -> Self {
        engine(StatusCode::UNPROCESSABLE_ENTITY, &e)
    }
}

impl From<WorkspaceError> for ApiError {
    fn from(e: WorkspaceError) -> Self {
        match e {
            WorkspaceError::Graph(g) => g.into(),
            WorkspaceError::Catalog(c) => c.into(),
            WorkspaceError::UnknownGraph { .. } | WorkspaceError::UnknownSavedQuery { .. } => engine(StatusCode::NOT_FOUND, &e),
            WorkspaceError::DuplicateGraph { .. } | WorkspaceError::NothingToUndo | WorkspaceError::NothingToRedo => engine(StatusCode::CONFLICT, &e),
            _ => engine(StatusCode::UNPROCESSABLE_ENTITY, &e),
        }
    }
}

impl From<UserError> for ApiError {
    fn from(e: UserError) -> Self {
        let code = match e {
            UserError::DuplicateUsername { .. } => StatusCode::CONFLICT,
            UserError::InvalidCredentials => StatusCode::UNAUTHORIZED,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        engine(code, &e)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let code = match e {
            StoreError::ProjectNotFound { .. } => StatusCode::NOT_FOUND,
            StoreError::DuplicateProject { .. } => StatusCode::CONFLICT,
        };
        engine(code, &e)
    }
}

impl From<DocumentError> for ApiError {
    fn from(e: DocumentError) -> Self {
        engine(StatusCode::UNPROCESSABLE_ENTITY, &e)
    }
}

impl From<LowerError> for ApiError {
    fn from(e: LowerError) -> Self {
        let LowerError::IncompleteGraph { diagnostics } = &e;
        let d = diagnostics.iter().map(|d| serde_json::to_value(d).unwrap_or(Value::Null)).collect();
        engine(StatusCode::UNPROCESSABLE_ENTITY, &e).with_diagnostics(d)
    }
}

impl From<AdvisorError> for ApiError {
    fn from(e: AdvisorError) -> Self {
        engine(StatusCode::UNPROCESSABLE_ENTITY, &e)
    }
}

impl From<PlanError> for ApiError {
    fn from(e: PlanError) -> Self {
        engine(StatusCode::UNPROCESSABLE_ENTITY, &e)
    }
}

impl From<PseudoError> for ApiError {
    fn from(e: PseudoError) -> Self {
        engine(StatusCode::UNPROCESSABLE_ENTITY, &e)
    }
}

impl From<UnknownDataType> for ApiError {
    fn from(e: UnknownDataType) -> Self {
        engine(StatusCode::NOT_FOUND, &e)
    }
}

impl From<RenderError> for ApiError {
    fn from(e: RenderError) -> Self {
        ApiError::unprocessable(e.to_string())
    }
}

impl From<EvalError> for ApiError {
    fn from(e: EvalError) -> Self {
        ApiError::unprocessable(e.to_string())
    }
}

impl From<FixtureError> for ApiError {
    fn from(e: FixtureError) -> Self {
        ApiError::unprocessable(e.to_string())
    }
}

/// A parse failure carries the plain-language explanation as feedback.
pub fn parse_error(e: &ParseError, source: &str) -> ApiError {
    ApiError::unprocessable(explain_error(e, source)).with_payload(e)
}

/// Query-string parameters. Failures become an error envelope.
pub struct Params<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for Params<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        match Query::<T>::from_request_parts(parts, state).await {
            Ok(Query(v)) => Ok(Params(v)),
            Err(e) => Err(ApiError::bad_request(format!("The query string is not valid: {}.", e.body_text()))),
        }
    }
}

/// Path parameters. Failures become an error envelope.
pub struct Segments<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned + Send> FromRequestParts<S> for Segments<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        match Path::<T>::from_request_parts(parts, state).await {
            Ok(Path(v)) => Ok(Segments(v)),
            Err(e) => Err(ApiError::bad_request(format!("The address is not valid: {}.", e.body_text()))),
        }
    }
}

/// A JSON request body. Failures name the field at fault.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = axum::body::Bytes::from_request(req, state).await.map_err(|e| ApiError::bad_request(format!("The request body could not be read: {e}.")))?;
        let text = if bytes.iter().all(u8::is_ascii_whitespace) { &b"null"[..] } else { &bytes[..] };
        let de = &mut serde_json::Deserializer::from_slice(text);
        match serde_path_to_error::deserialize(de) {
            Ok(v) => Ok(Body(v)),
            Err(e) => {
                let path = e.path().to_string();
                let inner = e.into_inner();
                let feedback = if bytes.iter().all(u8::is_ascii_whitespace) {
                    "This request needs a JSON body; see the API reference for its fields.".to_string()
                } else if path == "." {
                    format!("The request body is not valid: {inner}.")
                } else {
                    format!("The request body is not valid at {path}: {inner}.")
                };
                Err(ApiError::bad_request(feedback).with_payload(serde_json::json!({ "path": path })))
            }
        }
    }
}
