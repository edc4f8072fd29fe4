//! Delivery targets for due notifications.

use std::io::Write;
use std::sync::Mutex;
use std::time::Duration;

use eventpin_core::schedule::NotificationKind;
use eventpin_core::time::{format_timestamp, serde_ts, Timestamp};
use eventpin_core::{EventCandidate, Notification, PriorityLevel};
use serde::Serialize;

/// What a sink receives: the notification plus the event it is about.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delivery {
    pub notification_id: String,
    pub event_id: String,
    pub kind: NotificationKind,
    pub priority: PriorityLevel,
    #[serde(with = "serde_ts")]
    pub fire_at: Timestamp,
    pub event_type: String,
    #[serde(with = "serde_ts")]
    pub occurs_at: Timestamp,
    pub sender: String,
    pub chat_id: String,
    pub participants: Vec<String>,
}

impl Delivery {
    pub fn new(n: &Notification, event: &EventCandidate) -> Self {
        Self {
            notification_id: n.id.clone(),
            event_id: n.event_id.clone(),
            kind: n.kind,
            priority: n.priority,
            fire_at: n.fire_at,
            event_type: event.event_type.clone(),
            occurs_at: event.occurs_at,
            sender: event.sender.clone(),
            chat_id: event.chat_id.clone(),
            participants: event.participants.clone(),
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "[{}] {} at {} from {} ({}, {})",
            self.priority,
            self.event_type,
            format_timestamp(&self.occurs_at),
            self.sender,
            self.kind.as_str(),
            self.notification_id
        )
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{sink}: {reason}")]
pub struct SinkFailure {
    pub sink: String,
    pub reason: String,
}

pub trait Sink: Send {
    fn name(&self) -> &str;
    fn deliver(&self, delivery: &Delivery) -> Result<(), SinkFailure>;
}

/// Writes one summary line per delivery.
pub struct LineSink {
    out: Mutex<Box<dyn Write + Send>>,
}

impl LineSink {
    pub fn new(out: Box<dyn Write + Send>) -> Self {
        Self { out: Mutex::new(out) }
    }

    pub fn stdout() -> Self {
        Self::new(Box::new(std::io::stdout()))
    }
}

impl Sink for LineSink {
    fn name(&self) -> &str {
        "stdout"
    }

    fn deliver(&self, delivery: &Delivery) -> Result<(), SinkFailure> {
        let mut out = self.out.lock().unwrap_or_else(|e| e.into_inner());
        writeln!(out, "{}", delivery.summary())
            .and_then(|_| out.flush())
            .map_err(|e| SinkFailure {
                sink: self.name().into(),
                reason: e.to_string(),
            })
    }
}

/// POSTs each delivery as JSON. Any non-2xx answer is a failure.
pub struct WebhookSink {
    url: String,
    agent: ureq::Agent,
}

impl WebhookSink {
    pub fn new(url: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(10)))
            .http_status_as_error(false)
            .build()
            .into();
        Self { url: url.into(), agent }
    }

    pub fn from_env() -> Option<Self> {
        std::env::var("WEBHOOK_URL")
            .ok()
            .filter(|u| !u.is_empty())
            .map(Self::new)
    }
}

impl Sink for WebhookSink {
    fn name(&self) -> &str {
        "webhook"
    }

    fn deliver(&self, delivery: &Delivery) -> Result<(), SinkFailure> {
        let fail = |reason: String| SinkFailure {
            sink: self.name().into(),
            reason,
        };
        let body = serde_json::to_string(delivery).map_err(|e| fail(e.to_string()))?;
        let resp = self
            .agent
            .post(&self.url)
            .header("content-type", "application/json")
            .send(body.as_str())
            .map_err(|e| fail(e.to_string()))?;
        let status = resp.status();
        if status.is_success() {
            Ok(())
        } else {
            Err(fail(format!("{} answered {}", self.url, status)))
        }
    }
}
