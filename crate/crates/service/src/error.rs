use axum::extract::rejection::JsonRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::Value;

use taskdraft_core::cnl::CnlError;
use taskdraft_core::kb::KbError;
use taskdraft_core::pipeline::DraftError;
use taskdraft_core::planner::PlanError;
use taskdraft_core::script::CommandError;

/// Error body: `{"error": <code>, "message": <text>, ...extra}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub extra: Option<(&'static str, Value)>,
}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a str,
    message: &'a str,
}

impl ApiError {
    pub fn new(status: StatusCode, code: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            status,
            code: code.into(),
            message: message.into(),
            extra: None,
        }
    }

    pub fn schema(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "schema", message)
    }

    pub fn stale(current: u64, sent: u64) -> Self {
        Self {
            extra: Some(("revision", Value::from(current))),
            ..Self::new(
                StatusCode::CONFLICT,
                "stale-revision",
                format!("request was based on revision {sent}; the model is at {current}"),
            )
        }
    }

    fn domain(code: &str, message: String) -> Self {
        let status = if code == "unknown-node" {
            StatusCode::NOT_FOUND
        } else {
            StatusCode::UNPROCESSABLE_ENTITY
        };
        Self::new(status, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = serde_json::to_value(Body {
            error: &self.code,
            message: &self.message,
        })
        .expect("error body serializes");
        if let (Some((key, value)), Value::Object(map)) = (self.extra, &mut body) {
            map.insert(key.to_string(), value);
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::schema(r.body_text())
    }
}

impl From<KbError> for ApiError {
    fn from(e: KbError) -> Self {
        ApiError::domain(e.code(), e.to_string())
    }
}

impl From<CnlError> for ApiError {
    fn from(e: CnlError) -> Self {
        ApiError::domain(e.code(), e.to_string())
    }
}

impl From<CommandError> for ApiError {
    fn from(e: CommandError) -> Self {
        ApiError::domain(e.code(), e.to_string())
    }
}

impl From<PlanError> for ApiError {
    fn from(e: PlanError) -> Self {
        let mut err = ApiError::domain(e.code(), e.to_string());
        if let PlanError::Invalid(v) = &e {
            err.extra = Some(("violations", serde_json::to_value(v).expect("violations serialize")));
        }
        err
    }
}

impl From<DraftError> for ApiError {
    fn from(e: DraftError) -> Self {
        match e {
            DraftError::Invalid(v) => PlanError::Invalid(v).into(),
            DraftError::Plan(p) => p.into(),
            DraftError::Realize(r) => ApiError::domain(r.code(), r.to_string()),
            DraftError::UnsupportedLanguage(l) => ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "unsupported-language",
                format!("no rules or lexicon for `{l}`"),
            ),
        }
    }
}
