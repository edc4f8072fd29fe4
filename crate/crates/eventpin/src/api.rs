//! HTTP API over a shared [`Service`].

use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use eventpin_core::schedule::NotificationState;
use eventpin_core::time::{parse_timestamp, Timestamp};
use eventpin_core::{DateOrder, EventStatus, PriorityLevel, UserPreferences};
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

use crate::ingest::{parse_jsonl_messages, parse_whatsapp_export};
use crate::service::{EventFilter, Service, ServiceError};

pub type Clock = Arc<dyn Fn() -> Timestamp + Send + Sync>;

pub struct AppState {
    pub service: Mutex<Service>,
    pub clock: Clock,
}

impl AppState {
    pub fn new(service: Service, clock: Clock) -> Arc<Self> {
        Arc::new(Self {
            service: Mutex::new(service),
            clock,
        })
    }

    pub fn lock(&self) -> MutexGuard<'_, Service> {
        self.service.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn now(&self) -> Timestamp {
        (self.clock)()
    }
}

/// Local wall clock truncated to the minute.
pub fn system_clock() -> Clock {
    Arc::new(|| eventpin_core::time::truncate_to_minute(chrono::Local::now().naive_local()))
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::UnknownId(_) => StatusCode::NOT_FOUND,
            ServiceError::Preferences(_) | ServiceError::Model(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

fn unprocessable(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::UNPROCESSABLE_ENTITY, msg.into())
}

pub fn router(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let mut app = Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/ingest", post(ingest))
        .route("/scan", post(scan))
        .route("/events", get(list_events))
        .route("/events/{id}/feedback", post(feedback))
        .route("/notifications", get(list_notifications))
        .route("/notifications/{id}/ack", post(ack))
        .route("/preferences", get(get_preferences).put(put_preferences))
        .with_state(state);
    if let Some(dir) = ui_dir {
        app = app.nest_service("/ui", ServeDir::new(dir).append_index_html_on_directories(true));
    }
    app
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum IngestFormat {
    Whatsapp,
    Jsonl,
}

#[derive(Debug, Deserialize)]
struct IngestBody {
    format: IngestFormat,
    #[serde(default)]
    chat_id: String,
    #[serde(default)]
    is_group: bool,
    content: String,
    #[serde(default)]
    date_order: Option<DateOrder>,
}

async fn ingest(State(app): State<Arc<AppState>>, Json(body): Json<IngestBody>) -> Result<Response, ApiError> {
    let (messages, skipped) = match body.format {
        IngestFormat::Whatsapp => {
            if body.chat_id.is_empty() {
                return Err(unprocessable("chat_id is required for whatsapp exports"));
            }
            let order = body.date_order.unwrap_or(DateOrder::Dmy);
            let messages = parse_whatsapp_export(&body.content, &body.chat_id, body.is_group, order)
                .map_err(|e| unprocessable(e.to_string()))?;
            (messages, Vec::new())
        }
        IngestFormat::Jsonl => {
            let parsed = parse_jsonl_messages(&body.content);
            (parsed.messages, parsed.skipped)
        }
    };
    let now = app.now();
    let added = app.lock().ingest(&messages, now)?;
    let body = json!({ "new_messages": added, "skipped": skipped });
    Ok((StatusCode::ACCEPTED, Json(body)).into_response())
}

async fn scan(State(app): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let now = app.now();
    let report = app.lock().run_scan(now)?;
    Ok(Json(report).into_response())
}

#[derive(Debug, Deserialize)]
struct EventQuery {
    from: Option<String>,
    to: Option<String>,
    status: Option<EventStatus>,
}

fn query_ts(field: &str, value: Option<&str>) -> Result<Option<Timestamp>, ApiError> {
    value
        .map(|v| parse_timestamp(v).map_err(|e| unprocessable(format!("{field}: {e}"))))
        .transpose()
}

async fn list_events(State(app): State<Arc<AppState>>, Query(q): Query<EventQuery>) -> Result<Response, ApiError> {
    let filter = EventFilter {
        from: query_ts("from", q.from.as_deref())?,
        to: query_ts("to", q.to.as_deref())?,
        status: q.status,
    };
    Ok(Json(app.lock().events(&filter)).into_response())
}

#[derive(Debug, Deserialize)]
struct NotificationQuery {
    state: Option<NotificationState>,
}

async fn list_notifications(
    State(app): State<Arc<AppState>>,
    Query(q): Query<NotificationQuery>,
) -> Json<Vec<eventpin_core::Notification>> {
    Json(app.lock().notifications(q.state))
}

async fn ack(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let now = app.now();
    app.lock().acknowledge(&id, now)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Deserialize)]
struct FeedbackBody {
    priority: PriorityLevel,
}

async fn feedback(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<FeedbackBody>,
) -> Result<Response, ApiError> {
    let now = app.now();
    let view = app.lock().apply_feedback(&id, body.priority, now)?;
    Ok(Json(view).into_response())
}

async fn get_preferences(State(app): State<Arc<AppState>>) -> Json<UserPreferences> {
    Json(app.lock().preferences().clone())
}

async fn put_preferences(
    State(app): State<Arc<AppState>>,
    Json(prefs): Json<UserPreferences>,
) -> Result<Json<UserPreferences>, ApiError> {
    let now = app.now();
    let mut service = app.lock();
    service.set_preferences(prefs, now)?;
    Ok(Json(service.preferences().clone()))
}

/// Runs `tick` every `interval` on the blocking pool until the task is dropped.
pub async fn tick_loop(app: Arc<AppState>, interval: std::time::Duration) {
    let mut timer = tokio::time::interval(interval);
    loop {
        timer.tick().await;
        let app = app.clone();
        let outcome = tokio::task::spawn_blocking(move || {
            let now = app.now();
            app.lock().tick(now)
        })
        .await;
        match outcome {
            Ok(Ok(report)) => {
                for failure in report.failures {
                    eprintln!("delivery failed: {failure}");
                }
            }
            Ok(Err(e)) => eprintln!("tick failed: {e}"),
            Err(e) => eprintln!("tick panicked: {e}"),
        }
    }
}
