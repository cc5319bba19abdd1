use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use framemaker_core::store::StoreError;
use framemaker_core::{ValidationReport, WizardError};
use serde::Serialize;

/// Error body: `{code, message, report?}`.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ValidationReport>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status, body: ErrorBody { code: code.to_string(), message: message.into(), report: None } }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "INVALID_REQUEST", message)
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "UNAUTHORIZED", "a valid bearer token is required")
    }

    pub fn forbidden() -> Self {
        Self::new(StatusCode::FORBIDDEN, "FORBIDDEN", "this session belongs to another contributor")
    }

    fn with_report(mut self, report: Option<&ValidationReport>) -> Self {
        self.body.report = report.cloned();
        self
    }
}

fn store_status(e: &StoreError) -> StatusCode {
    match e {
        StoreError::DuplicateName(_) | StoreError::Conflict(_) | StoreError::DuplicateLu(_) => StatusCode::CONFLICT,
        StoreError::NotFound(_) | StoreError::UnknownFrame(_) => StatusCode::NOT_FOUND,
        StoreError::ValidationFailed(_) | StoreError::ImportRejected(_) => StatusCode::UNPROCESSABLE_ENTITY,
        StoreError::SchemaMismatch(_) => StatusCode::BAD_REQUEST,
        StoreError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::new(store_status(&e), e.code(), e.to_string()).with_report(e.report())
    }
}

impl From<WizardError> for ApiError {
    fn from(e: WizardError) -> Self {
        let status = match &e {
            WizardError::UnknownSession(_) | WizardError::UnknownFrame(_) => StatusCode::NOT_FOUND,
            WizardError::SessionExpired(_) => StatusCode::GONE,
            WizardError::WrongStep { .. } | WizardError::DuplicateName(_) => StatusCode::CONFLICT,
            WizardError::Rejected(_) | WizardError::ValidationFailed(_) => StatusCode::UNPROCESSABLE_ENTITY,
            WizardError::Store(s) => store_status(s),
            WizardError::SessionStorage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            tracing::error!(error = %e, "request failed");
        }
        ApiError::new(status, e.code(), e.to_string()).with_report(e.report())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
