use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::priority::PriorityLevel;

/// Weight used for event types and senders the user has not rated.
pub const DEFAULT_WEIGHT: f64 = 0.5;

/// Hours `[start, end)` during which reminders are held back. Wraps past
/// midnight when `start > end` (22 to 7); `start == end` is an empty window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuietHours {
    pub start: u32,
    pub end: u32,
}

impl QuietHours {
    pub fn contains(&self, hour: u32) -> bool {
        if self.start <= self.end {
            self.start <= hour && hour < self.end
        } else {
            hour >= self.start || hour < self.end
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UserPreferences {
    pub event_type_weights: BTreeMap<String, f64>,
    pub sender_affinity: BTreeMap<String, f64>,
    /// Reminder lead times in minutes, replacing the built-in table for a level.
    pub lead_schedule: BTreeMap<PriorityLevel, Vec<i64>>,
    pub quiet_hours: Option<QuietHours>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PreferencesError {
    #[error("{field}: weight {value} is outside [0, 1]")]
    WeightOutOfRange { field: String, value: f64 },
    #[error("lead_schedule.{level:?}: lead {minutes} must be positive")]
    NonPositiveLead { level: PriorityLevel, minutes: i64 },
    #[error("quiet_hours: hours must be within 0..=23")]
    QuietHoursOutOfRange,
}

impl UserPreferences {
    pub fn type_weight(&self, event_type: &str) -> f64 {
        self.event_type_weights
            .get(event_type)
            .copied()
            .unwrap_or(DEFAULT_WEIGHT)
    }

    pub fn affinity(&self, sender: &str) -> f64 {
        self.sender_affinity.get(sender).copied().unwrap_or(DEFAULT_WEIGHT)
    }

    pub fn validate(&self) -> Result<(), PreferencesError> {
        let weights = self
            .event_type_weights
            .iter()
            .map(|(k, v)| (alloc::format!("event_type_weights.{k}"), *v))
            .chain(
                self.sender_affinity
                    .iter()
                    .map(|(k, v)| (alloc::format!("sender_affinity.{k}"), *v)),
            );
        for (field, value) in weights {
            if !(0.0..=1.0).contains(&value) {
                return Err(PreferencesError::WeightOutOfRange { field, value });
            }
        }
        for (level, leads) in &self.lead_schedule {
            if let Some(&minutes) = leads.iter().find(|m| **m <= 0) {
                return Err(PreferencesError::NonPositiveLead { level: *level, minutes });
            }
        }
        if let Some(q) = self.quiet_hours {
            if q.start > 23 || q.end > 23 {
                return Err(PreferencesError::QuietHoursOutOfRange);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quiet_hours_wrap_midnight() {
        let q = QuietHours { start: 22, end: 7 };
        assert!(q.contains(23) && q.contains(0) && q.contains(6));
        assert!(!q.contains(7) && !q.contains(21));
        let day = QuietHours { start: 13, end: 14 };
        assert!(day.contains(13) && !day.contains(14));
        assert!(!QuietHours { start: 5, end: 5 }.contains(5));
    }

    #[test]
    fn validation() {
        let mut prefs = UserPreferences::default();
        assert!(prefs.validate().is_ok());
        prefs.event_type_weights.insert("wedding".into(), 1.5);
        assert!(matches!(
            prefs.validate(),
            Err(PreferencesError::WeightOutOfRange { .. })
        ));
        prefs.event_type_weights.insert("wedding".into(), 0.9);
        prefs.lead_schedule.insert(PriorityLevel::Low, alloc::vec![0]);
        assert!(matches!(
            prefs.validate(),
            Err(PreferencesError::NonPositiveLead { .. })
        ));
    }

    #[test]
    fn document_shape() {
        let json = r#"{"event_type_weights":{"wedding":0.9},"quiet_hours":{"start":22,"end":7},"lead_schedule":{"High":[60]}}"#;
        let prefs: UserPreferences = serde_json::from_str(json).unwrap();
        assert_eq!(prefs.type_weight("wedding"), 0.9);
        assert_eq!(prefs.type_weight("party"), DEFAULT_WEIGHT);
        assert_eq!(prefs.lead_schedule[&PriorityLevel::High], [60]);
        assert!(prefs.sender_affinity.is_empty());
    }
}
