//! Scan, deliver, acknowledge and re-prioritize, all against one store.
//! Every operation takes `now` explicitly.

use eventpin_core::entity::ExtractionWarning;
use eventpin_core::prefs::PreferencesError;
use eventpin_core::priority::{featurize, prioritize, ModelError};
use eventpin_core::schedule::{plan_notifications, NotificationKind, NotificationState};
use eventpin_core::time::Timestamp;
use eventpin_core::{
    ChatMessage, EventCandidate, EventStatus, Extractor, KnnModel, Notification, PriorityLevel, UserPreferences,
};
use serde::Serialize;

use crate::ingest::ingest_new;
use crate::sink::{Delivery, Sink};
use crate::store::{EventRecord, FeedbackRecord, Record, ScanMark, Store, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("unknown id {0}")]
    UnknownId(String),
    #[error(transparent)]
    Preferences(#[from] PreferencesError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ServiceError {
    fn from_store(e: StoreError) -> Self {
        match e {
            StoreError::UnknownId(id) => ServiceError::UnknownId(id),
            other => ServiceError::Store(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventView {
    #[serde(flatten)]
    pub event: EventCandidate,
    pub priority: PriorityLevel,
    pub cold_start: bool,
    /// Planned and fired notifications, cancelled ones excluded.
    pub schedule: Vec<Notification>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScanReport {
    pub new_events: Vec<EventView>,
    pub planned: Vec<Notification>,
    pub warnings: Vec<ExtractionWarning>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TickReport {
    pub delivered: Vec<Notification>,
    /// Reminders that came due only after their event had started.
    pub cancelled: Vec<Notification>,
    /// Sink errors; the affected notifications stay pending.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventFilter {
    pub from: Option<Timestamp>,
    pub to: Option<Timestamp>,
    pub status: Option<EventStatus>,
}

pub struct Service {
    store: Store,
    extractor: Extractor,
    k: usize,
    sinks: Vec<Box<dyn Sink>>,
}

impl Service {
    pub fn new(store: Store, extractor: Extractor, k: usize) -> Result<Self, ServiceError> {
        KnnModel::new(k)?;
        Ok(Self {
            store,
            extractor,
            k,
            sinks: Vec::new(),
        })
    }

    pub fn with_sink(mut self, sink: Box<dyn Sink>) -> Self {
        self.sinks.push(sink);
        self
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut Store {
        &mut self.store
    }

    /// Seed examples followed by every feedback example, oldest first.
    pub fn model(&self) -> Result<KnnModel, ServiceError> {
        let mut model = KnnModel::seeded(self.k)?;
        for f in &self.store.state().feedback {
            model.push(f.vector, f.label, eventpin_core::priority::Origin::Feedback);
        }
        Ok(model)
    }

    pub fn ingest(&mut self, messages: &[ChatMessage], now: Timestamp) -> Result<usize, ServiceError> {
        Ok(ingest_new(messages, &mut self.store, now)?)
    }

    /// Extracts, prioritizes and plans every message not scanned yet.
    pub fn run_scan(&mut self, now: Timestamp) -> Result<ScanReport, ServiceError> {
        let state = self.store.state();
        let total = state.messages.len();
        if state.scanned >= total {
            return Ok(ScanReport::default());
        }
        let pending: Vec<ChatMessage> = state.messages.values().skip(state.scanned).cloned().collect();
        let model = self.model()?;
        let prefs = state.prefs.clone();
        let mut report = ScanReport::default();
        for message in &pending {
            let extraction = self.extractor.message_to_events(message);
            for w in extraction.warnings {
                self.store.append(Record::Warning(w.clone()), now)?;
                report.warnings.push(w);
            }
            for candidate in extraction.candidates {
                if self.store.state().events.contains_key(&candidate.id) {
                    continue;
                }
                let vector = featurize(&candidate, &prefs, now);
                let class = prioritize(&model, &vector, candidate.occurs_at - now);
                let plan = plan_notifications(&candidate, class.level, now, &prefs);
                let id = candidate.id.clone();
                self.store.upsert_event(
                    EventRecord {
                        event: candidate,
                        priority: class.level,
                        cold_start: class.cold_start,
                    },
                    now,
                )?;
                for n in plan {
                    self.store.upsert_notification(n.clone(), now)?;
                    report.planned.push(n);
                }
                report.new_events.extend(self.event_view(&id));
            }
        }
        self.store.append(Record::Scan(ScanMark { messages: total }), now)?;
        Ok(report)
    }

    /// Delivers every pending notification due at `now` to all sinks. A
    /// notification is marked delivered only when every sink accepted it.
    pub fn tick(&mut self, now: Timestamp) -> Result<TickReport, ServiceError> {
        let state = self.store.state();
        let mut due: Vec<Notification> = state
            .notifications
            .values()
            .filter(|n| n.state == NotificationState::Pending && n.fire_at <= now)
            .cloned()
            .collect();
        due.sort_by(|a, b| a.fire_at.cmp(&b.fire_at).then_with(|| a.id.cmp(&b.id)));
        let mut report = TickReport::default();
        for mut n in due {
            let Some(event) = self.store.state().events.get(&n.event_id).map(|e| e.event.clone()) else {
                continue;
            };
            if n.kind == NotificationKind::Reminder && event.occurs_at < now {
                n.state = NotificationState::Cancelled;
                self.store.upsert_notification(n.clone(), now)?;
                report.cancelled.push(n);
                continue;
            }
            let delivery = Delivery::new(&n, &event);
            let failures: Vec<String> = self
                .sinks
                .iter()
                .filter_map(|s| s.deliver(&delivery).err())
                .map(|e| format!("{}: {e}", n.id))
                .collect();
            if failures.is_empty() {
                n.state = NotificationState::Delivered;
                self.store.upsert_notification(n.clone(), now)?;
                report.delivered.push(n);
            } else {
                report.failures.extend(failures);
            }
        }
        let expired: Vec<EventRecord> = self
            .store
            .state()
            .events
            .values()
            .filter(|e| e.event.status == EventStatus::Active && e.event.occurs_at < now)
            .cloned()
            .collect();
        for mut e in expired {
            e.event.status = EventStatus::Expired;
            self.store.upsert_event(e, now)?;
        }
        Ok(report)
    }

    /// Acknowledges a notification, or an event with all its notifications.
    pub fn acknowledge(&mut self, id: &str, now: Timestamp) -> Result<(), ServiceError> {
        self.store.record_ack(id, now).map_err(ServiceError::from_store)?;
        Ok(())
    }

    /// Records the user's label as a training example and makes it the
    /// event's priority. On a change, notifications that have not fired are
    /// cancelled and the new level's schedule is planned from `now`.
    pub fn apply_feedback(
        &mut self,
        event_id: &str,
        label: PriorityLevel,
        now: Timestamp,
    ) -> Result<EventView, ServiceError> {
        let state = self.store.state();
        let mut record = state
            .events
            .get(event_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownId(event_id.to_string()))?;
        let prefs = state.prefs.clone();
        let vector = featurize(&record.event, &prefs, now);
        self.store.append(
            Record::Feedback(FeedbackRecord {
                event_id: event_id.to_string(),
                vector,
                label,
            }),
            now,
        )?;
        if record.priority != label {
            let existing: Vec<Notification> = self
                .store
                .state()
                .notifications
                .values()
                .filter(|n| n.event_id == event_id)
                .cloned()
                .collect();
            let detection_fired = existing.iter().any(|n| {
                n.kind == NotificationKind::Detection
                    && matches!(n.state, NotificationState::Delivered | NotificationState::Acknowledged)
            });
            for mut n in existing.into_iter().filter(|n| n.state == NotificationState::Pending) {
                n.state = NotificationState::Cancelled;
                self.store.upsert_notification(n, now)?;
            }
            let plan: Vec<Notification> = plan_notifications(&record.event, label, now, &prefs)
                .into_iter()
                .filter(|n| !(detection_fired && n.kind == NotificationKind::Detection))
                .filter(|n| {
                    self.store
                        .state()
                        .notifications
                        .get(&n.id)
                        .is_none_or(|old| old.state == NotificationState::Cancelled)
                })
                .collect();
            if !plan.is_empty() && record.event.status == EventStatus::Acknowledged {
                record.event.status = EventStatus::Active;
            }
            for n in plan {
                self.store.upsert_notification(n, now)?;
            }
            record.priority = label;
            record.cold_start = false;
            self.store.upsert_event(record, now)?;
        }
        self.event_view(event_id)
            .ok_or_else(|| ServiceError::UnknownId(event_id.to_string()))
    }

    pub fn event_view(&self, id: &str) -> Option<EventView> {
        let state = self.store.state();
        let record = state.events.get(id)?;
        let mut schedule: Vec<Notification> = state
            .notifications
            .values()
            .filter(|n| n.event_id == id && n.state != NotificationState::Cancelled)
            .cloned()
            .collect();
        schedule.sort_by(|a, b| a.fire_at.cmp(&b.fire_at).then_with(|| a.id.cmp(&b.id)));
        Some(EventView {
            event: record.event.clone(),
            priority: record.priority,
            cold_start: record.cold_start,
            schedule,
        })
    }

    pub fn events(&self, filter: &EventFilter) -> Vec<EventView> {
        let mut views: Vec<EventView> = self
            .store
            .state()
            .events
            .values()
            .filter(|e| filter.from.is_none_or(|from| e.event.occurs_at >= from))
            .filter(|e| filter.to.is_none_or(|to| e.event.occurs_at <= to))
            .filter(|e| filter.status.is_none_or(|s| e.event.status == s))
            .filter_map(|e| self.event_view(&e.event.id))
            .collect();
        views.sort_by(|a, b| {
            a.event
                .occurs_at
                .cmp(&b.event.occurs_at)
                .then_with(|| a.event.id.cmp(&b.event.id))
        });
        views
    }

    /// Notifications by state, sorted by fire time. `Pending` (and no
    /// filter) means pinned: not fired yet, or fired and not acknowledged.
    pub fn notifications(&self, state: Option<NotificationState>) -> Vec<Notification> {
        let keep = |n: &Notification| match state {
            None | Some(NotificationState::Pending) => n.state.is_pinned(),
            Some(s) => n.state == s,
        };
        let mut out: Vec<Notification> = self
            .store
            .state()
            .notifications
            .values()
            .filter(|n| keep(n))
            .cloned()
            .collect();
        out.sort_by(|a, b| a.fire_at.cmp(&b.fire_at).then_with(|| a.id.cmp(&b.id)));
        out
    }

    pub fn preferences(&self) -> &UserPreferences {
        &self.store.state().prefs
    }

    pub fn set_preferences(&mut self, prefs: UserPreferences, now: Timestamp) -> Result<(), ServiceError> {
        prefs.validate()?;
        self.store.append(Record::Pref(prefs), now)?;
        Ok(())
    }
}
