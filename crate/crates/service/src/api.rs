use std::future::Future;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::header::{CACHE_CONTROL, CONTENT_TYPE, ETAG, IF_NONE_MATCH};
use axum::http::{HeaderMap, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use nyts_core::answers::{Answer, AnswerSet};
use nyts_core::QuestionCatalog;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::state::{AppState, Counters, PredictFailure, ServiceConfig, ServiceError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionDto {
    pub code: u32,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionDto {
    pub id: String,
    pub text: String,
    pub kind: String,
    pub options: Vec<OptionDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionList {
    pub catalog_version: String,
    pub questions: Vec<QuestionDto>,
}

impl QuestionList {
    pub fn from_catalog(catalog: &QuestionCatalog) -> Self {
        let questions = catalog
            .predictor_questions()
            .into_iter()
            .map(|q| QuestionDto {
                id: q.id.clone(),
                text: q.text.clone(),
                kind: q.domain.kind.as_str().to_string(),
                options: q
                    .domain
                    .labelled_codes()
                    .into_iter()
                    .map(|(code, label)| OptionDto {
                        code,
                        label: label.to_string(),
                    })
                    .collect(),
            })
            .collect();
        QuestionList {
            catalog_version: catalog.version.clone(),
            questions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionResponse {
    pub probability_yes: f64,
    pub label: u8,
    pub intention: String,
    pub model_id: String,
    pub catalog_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub model_id: Option<String>,
    pub catalog_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<u32>,
}

fn error(status: StatusCode, body: ErrorBody) -> Response {
    (status, Json(body)).into_response()
}

fn malformed(field: &str, message: impl Into<String>) -> Response {
    error(
        StatusCode::BAD_REQUEST,
        ErrorBody {
            error: message.into(),
            field: Some(field.to_string()),
            question: None,
            code: None,
        },
    )
}

/// Reads `{"answers": {"Q1": 3, "Q4": [1, 2]}}`, naming the offending field
/// on failure.
fn parse_submission(body: &[u8]) -> Result<AnswerSet, Response> {
    let value: Value = serde_json::from_slice(body)
        .map_err(|e| malformed("body", format!("invalid JSON: {e}")))?;
    let Value::Object(root) = value else {
        return Err(malformed("body", "expected a JSON object"));
    };
    if let Some(extra) = root.keys().find(|k| *k != "answers") {
        return Err(malformed(extra, format!("unexpected field `{extra}`")));
    }
    let answers = match root.get("answers") {
        Some(Value::Object(map)) => map,
        Some(_) => return Err(malformed("answers", "`answers` must be an object")),
        None => return Err(malformed("answers", "missing field `answers`")),
    };
    let code = |v: &Value, field: &str| -> Result<u32, Response> {
        v.as_u64()
            .and_then(|c| u32::try_from(c).ok())
            .ok_or_else(|| {
                malformed(
                    field,
                    format!("`{field}` must be a non-negative integer code"),
                )
            })
    };
    let mut out = AnswerSet::new();
    for (id, v) in answers {
        let field = format!("answers.{id}");
        let answer = match v {
            Value::Array(items) => Answer::Multi(
                items
                    .iter()
                    .enumerate()
                    .map(|(i, item)| code(item, &format!("{field}[{i}]")))
                    .collect::<Result<_, _>>()?,
            ),
            other => Answer::Single(code(other, &field)?),
        };
        out.insert(id.clone(), answer);
    }
    Ok(out)
}

async fn questions(State(state): State<AppState>, headers: HeaderMap) -> Response {
    let etag = format!("\"{}\"", state.catalog().version);
    let cache = [
        (ETAG, etag.clone()),
        (CACHE_CONTROL, "public, max-age=3600".to_string()),
    ];
    if headers.get(IF_NONE_MATCH).and_then(|v| v.to_str().ok()) == Some(etag.as_str()) {
        return (StatusCode::NOT_MODIFIED, cache).into_response();
    }
    (
        cache,
        [(CONTENT_TYPE, "application/json")],
        Bytes::copy_from_slice(state.questions_json()),
    )
        .into_response()
}

async fn predict(State(state): State<AppState>, body: Bytes) -> Response {
    let counters = state.counters();
    Counters::bump(&counters.predict_requests);
    if state.model().is_none() {
        Counters::bump(&counters.unavailable);
        return error(
            StatusCode::SERVICE_UNAVAILABLE,
            ErrorBody {
                error: "no model loaded".into(),
                field: None,
                question: None,
                code: None,
            },
        );
    }
    let answers = match parse_submission(&body) {
        Ok(a) => a,
        Err(resp) => {
            Counters::bump(&counters.malformed);
            return resp;
        }
    };
    match state.predict(&answers) {
        Ok(p) => {
            let loaded = state.model().expect("checked above");
            Json(PredictionResponse {
                probability_yes: p.probability_yes,
                label: p.label,
                intention: if p.label == 1 { "yes" } else { "no" }.into(),
                model_id: loaded.id.clone(),
                catalog_version: state.catalog().version.clone(),
            })
            .into_response()
        }
        Err(PredictFailure::NoModel) => {
            Counters::bump(&counters.unavailable);
            error(
                StatusCode::SERVICE_UNAVAILABLE,
                ErrorBody {
                    error: "no model loaded".into(),
                    field: None,
                    question: None,
                    code: None,
                },
            )
        }
        Err(PredictFailure::Answer(e)) => {
            Counters::bump(&counters.invalid);
            let code = match &e {
                nyts_core::answers::AnswerError::OutOfDomain { code, .. } => Some(*code),
                _ => None,
            };
            error(
                StatusCode::UNPROCESSABLE_ENTITY,
                ErrorBody {
                    error: e.to_string(),
                    field: None,
                    question: Some(e.question().to_string()),
                    code,
                },
            )
        }
        Err(PredictFailure::Input(e)) => {
            Counters::bump(&counters.invalid);
            error(
                StatusCode::UNPROCESSABLE_ENTITY,
                ErrorBody {
                    error: e.to_string(),
                    field: None,
                    question: None,
                    code: None,
                },
            )
        }
    }
}

async fn health(State(state): State<AppState>) -> Json<HealthResponse> {
    let model = state.model();
    Json(HealthResponse {
        status: if model.is_some() { "ok" } else { "degraded" }.into(),
        model_id: model.map(|m| m.id.clone()),
        catalog_version: state.catalog().version.clone(),
    })
}

async fn metrics(State(state): State<AppState>) -> Response {
    Json(state.counters().snapshot()).into_response()
}

fn cors(config: &ServiceConfig) -> Result<CorsLayer, ServiceError> {
    let origin = if config.allowed_origins.iter().any(|o| o == "*") {
        AllowOrigin::any()
    } else {
        let list = config
            .allowed_origins
            .iter()
            .map(|o| HeaderValue::from_str(o).map_err(|_| ServiceError::BadOrigin(o.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        AllowOrigin::list(list)
    };
    Ok(CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([CONTENT_TYPE, IF_NONE_MATCH])
        .expose_headers([ETAG]))
}

pub fn router(state: AppState, config: &ServiceConfig) -> Result<Router, ServiceError> {
    Ok(Router::new()
        .route("/api/questions", get(questions))
        .route("/api/predict", post(predict))
        .route("/api/health", get(health))
        .route("/api/metrics", get(metrics))
        .layer(cors(config)?)
        .with_state(state))
}

/// Serves until `shutdown` resolves.
pub async fn serve<F>(listener: TcpListener, app: Router, shutdown: F) -> std::io::Result<()>
where
    F: Future<Output = ()> + Send + 'static,
{
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
}
