//! Reminder planning.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use chrono::{Duration, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::digest::content_id;
use crate::entity::EventCandidate;
use crate::prefs::{QuietHours, UserPreferences};
use crate::priority::PriorityLevel;
use crate::time::{format_timestamp, serde_ts, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotificationKind {
    Detection,
    Reminder,
}

impl NotificationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NotificationKind::Detection => "detection",
            NotificationKind::Reminder => "reminder",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotificationState {
    Pending,
    Delivered,
    Acknowledged,
    /// Superseded by a replan before it fired.
    Cancelled,
}

impl NotificationState {
    /// Still owed to the user: either not yet fired or fired and unacknowledged.
    pub fn is_pinned(&self) -> bool {
        matches!(self, NotificationState::Pending | NotificationState::Delivered)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notification {
    pub id: String,
    pub event_id: String,
    #[serde(with = "serde_ts")]
    pub fire_at: Timestamp,
    pub kind: NotificationKind,
    pub priority: PriorityLevel,
    pub state: NotificationState,
}

impl Notification {
    pub fn new(event_id: &str, kind: NotificationKind, priority: PriorityLevel, fire_at: Timestamp) -> Self {
        let id = content_id(&[event_id, kind.as_str(), priority.as_str(), &format_timestamp(&fire_at)]);
        Self {
            id,
            event_id: event_id.to_string(),
            fire_at,
            kind,
            priority,
            state: NotificationState::Pending,
        }
    }
}

/// Built-in reminder leads in minutes.
pub fn default_leads(level: PriorityLevel) -> &'static [i64] {
    const DAY: i64 = 24 * 60;
    match level {
        PriorityLevel::High => &[7 * DAY, DAY, 3 * 60],
        PriorityLevel::Medium => &[3 * DAY, DAY],
        PriorityLevel::Low => &[DAY],
    }
}

pub fn leads_for(level: PriorityLevel, prefs: &UserPreferences) -> Vec<i64> {
    match prefs.lead_schedule.get(&level) {
        Some(leads) => leads.clone(),
        None => default_leads(level).to_vec(),
    }
}

/// First instant at or after `at` that is outside quiet hours.
fn quiet_end(at: Timestamp, quiet: &QuietHours) -> Timestamp {
    if !quiet.contains(at.hour()) {
        return at;
    }
    let end = at
        .date()
        .and_time(NaiveTime::from_hms_opt(quiet.end, 0, 0).unwrap_or(NaiveTime::MIN));
    if end > at {
        end
    } else {
        end + Duration::days(1)
    }
}

/// Detection at `now` plus one reminder per lead. Reminders already due
/// collapse into the detection; reminders landing in quiet hours move to
/// the end of the window unless that would pass the event. An event that has
/// already started gets only the detection.
pub fn plan_notifications(
    event: &EventCandidate,
    priority: PriorityLevel,
    now: Timestamp,
    prefs: &UserPreferences,
) -> Vec<Notification> {
    let mut plan = alloc::vec![Notification::new(&event.id, NotificationKind::Detection, priority, now)];
    if event.occurs_at < now {
        return plan;
    }
    let mut fire_times: Vec<Timestamp> = Vec::new();
    for lead in leads_for(priority, prefs) {
        let mut fire_at = event.occurs_at - Duration::minutes(lead);
        if fire_at > event.occurs_at {
            continue;
        }
        if let Some(quiet) = &prefs.quiet_hours {
            let shifted = quiet_end(fire_at, quiet);
            if shifted <= event.occurs_at {
                fire_at = shifted;
            }
        }
        if fire_at <= now {
            continue;
        }
        fire_times.push(fire_at);
    }
    fire_times.sort();
    fire_times.dedup();
    plan.extend(
        fire_times
            .into_iter()
            .map(|at| Notification::new(&event.id, NotificationKind::Reminder, priority, at)),
    );
    plan
}
