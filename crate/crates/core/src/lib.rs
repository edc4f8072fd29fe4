//! Core of the pinned event notifier: turns chat messages into dated event
//! candidates, ranks them with a k-nearest-neighbour prioritizer and plans
//! reminder schedules.
//!
//! Everything here is pure computation over `alloc` types. File IO, the
//! append-only store, the HTTP API and the CLI live in the `eventpin` crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod digest;
pub mod entity;
pub mod lexicon;
pub mod message;
pub mod prefs;
pub mod priority;
pub mod schedule;
pub mod temporal;
pub mod text;
pub mod time;

pub use entity::{EventCandidate, EventStatus, Extraction, ExtractionWarning, Extractor};
pub use lexicon::Lexicon;
pub use message::{ChatMessage, MessageSource};
pub use prefs::UserPreferences;
pub use priority::{FeatureVector, KnnModel, LabeledExample, PriorityLevel};
pub use schedule::{Notification, NotificationKind, NotificationState};
pub use temporal::{DateOrder, TemporalConfig};
pub use time::Timestamp;
