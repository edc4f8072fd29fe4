//! Append-only JSON-lines log. Every change is one record
//! `{"kind","seq","at","body"}`; the in-memory state is a fold over the
//! records in file order.

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use eventpin_core::entity::ExtractionWarning;
use eventpin_core::priority::FeatureVector;
use eventpin_core::schedule::NotificationState;
use eventpin_core::time::{serde_ts, Timestamp};
use eventpin_core::{ChatMessage, EventCandidate, EventStatus, Notification, PriorityLevel, UserPreferences};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Message,
    Event,
    Notification,
    Feedback,
    Ack,
    Pref,
    Warning,
    Scan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event: EventCandidate,
    pub priority: PriorityLevel,
    /// Priority came from the lead-time rule because the model was empty.
    #[serde(default)]
    pub cold_start: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub event_id: String,
    pub vector: FeatureVector,
    pub label: PriorityLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AckRecord {
    pub target: String,
}

/// Number of messages, in log order, that scanning has consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanMark {
    pub messages: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Message(ChatMessage),
    Event(EventRecord),
    Notification(Notification),
    Feedback(FeedbackRecord),
    Ack(AckRecord),
    Pref(UserPreferences),
    Warning(ExtractionWarning),
    Scan(ScanMark),
}

impl Record {
    pub fn kind(&self) -> RecordKind {
        match self {
            Record::Message(_) => RecordKind::Message,
            Record::Event(_) => RecordKind::Event,
            Record::Notification(_) => RecordKind::Notification,
            Record::Feedback(_) => RecordKind::Feedback,
            Record::Ack(_) => RecordKind::Ack,
            Record::Pref(_) => RecordKind::Pref,
            Record::Warning(_) => RecordKind::Warning,
            Record::Scan(_) => RecordKind::Scan,
        }
    }

    fn body(&self) -> serde_json::Result<serde_json::Value> {
        match self {
            Record::Message(b) => serde_json::to_value(b),
            Record::Event(b) => serde_json::to_value(b),
            Record::Notification(b) => serde_json::to_value(b),
            Record::Feedback(b) => serde_json::to_value(b),
            Record::Ack(b) => serde_json::to_value(b),
            Record::Pref(b) => serde_json::to_value(b),
            Record::Warning(b) => serde_json::to_value(b),
            Record::Scan(b) => serde_json::to_value(b),
        }
    }

    fn from_body(kind: RecordKind, body: serde_json::Value) -> serde_json::Result<Self> {
        use serde_json::from_value as v;
        Ok(match kind {
            RecordKind::Message => Record::Message(v(body)?),
            RecordKind::Event => Record::Event(v(body)?),
            RecordKind::Notification => Record::Notification(v(body)?),
            RecordKind::Feedback => Record::Feedback(v(body)?),
            RecordKind::Ack => Record::Ack(v(body)?),
            RecordKind::Pref => Record::Pref(v(body)?),
            RecordKind::Warning => Record::Warning(v(body)?),
            RecordKind::Scan => Record::Scan(v(body)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub seq: u64,
    pub at: Timestamp,
    pub record: Record,
}

#[derive(Serialize, Deserialize)]
struct WireRecord {
    kind: RecordKind,
    seq: u64,
    #[serde(with = "serde_ts")]
    at: Timestamp,
    body: serde_json::Value,
}

impl LogRecord {
    pub fn to_line(&self) -> serde_json::Result<String> {
        serde_json::to_string(&WireRecord {
            kind: self.record.kind(),
            seq: self.seq,
            at: self.at,
            body: self.record.body()?,
        })
    }

    pub fn from_line(line: &str) -> serde_json::Result<Self> {
        let wire: WireRecord = serde_json::from_str(line)?;
        Ok(LogRecord {
            seq: wire.seq,
            at: wire.at,
            record: Record::from_body(wire.kind, wire.body)?,
        })
    }
}

/// Everything the log says, folded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StoreState {
    pub messages: IndexMap<String, ChatMessage>,
    pub events: IndexMap<String, EventRecord>,
    pub notifications: IndexMap<String, Notification>,
    pub feedback: Vec<FeedbackRecord>,
    pub prefs: UserPreferences,
    pub warnings: Vec<ExtractionWarning>,
    pub scanned: usize,
    pub last_seq: u64,
}

impl StoreState {
    pub fn apply(&mut self, rec: &LogRecord) {
        self.last_seq = rec.seq;
        match &rec.record {
            Record::Message(m) => {
                self.messages.entry(m.id.clone()).or_insert_with(|| m.clone());
            }
            Record::Event(e) => {
                self.events.insert(e.event.id.clone(), e.clone());
            }
            Record::Notification(n) => {
                self.notifications.insert(n.id.clone(), n.clone());
            }
            Record::Feedback(f) => self.feedback.push(f.clone()),
            Record::Ack(a) => self.acknowledge(&a.target),
            Record::Pref(p) => self.prefs = p.clone(),
            Record::Warning(w) => self.warnings.push(w.clone()),
            Record::Scan(s) => self.scanned = s.messages,
        }
    }

    fn acknowledge(&mut self, target: &str) {
        if let Some(n) = self.notifications.get_mut(target) {
            if n.state.is_pinned() {
                n.state = NotificationState::Acknowledged;
            }
            let event_id = n.event_id.clone();
            let all_done = self
                .notifications
                .values()
                .filter(|n| n.event_id == event_id)
                .all(|n| matches!(n.state, NotificationState::Acknowledged | NotificationState::Cancelled));
            if all_done {
                if let Some(e) = self.events.get_mut(&event_id) {
                    e.event.status = EventStatus::Acknowledged;
                }
            }
        } else if let Some(e) = self.events.get_mut(target) {
            e.event.status = EventStatus::Acknowledged;
            for n in self.notifications.values_mut().filter(|n| n.event_id == target) {
                if n.state.is_pinned() {
                    n.state = NotificationState::Acknowledged;
                }
            }
        }
    }

    pub fn knows(&self, id: &str) -> bool {
        self.notifications.contains_key(id) || self.events.contains_key(id)
    }

    /// Records that rebuild this state with nothing superseded.
    pub fn live_records(&self) -> Vec<Record> {
        let mut out: Vec<Record> = Vec::new();
        out.extend(self.messages.values().cloned().map(Record::Message));
        out.extend(self.events.values().cloned().map(Record::Event));
        out.extend(self.notifications.values().cloned().map(Record::Notification));
        out.extend(self.feedback.iter().cloned().map(Record::Feedback));
        if self.prefs != UserPreferences::default() {
            out.push(Record::Pref(self.prefs.clone()));
        }
        out.extend(self.warnings.iter().cloned().map(Record::Warning));
        if self.scanned > 0 {
            out.push(Record::Scan(ScanMark { messages: self.scanned }));
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path} is locked by another writer")]
    Locked { path: PathBuf },
    #[error("{path}:{line}: corrupt record after seq {after_seq}: {reason}")]
    CorruptRecord {
        path: PathBuf,
        line: usize,
        after_seq: u64,
        reason: String,
    },
    #[error("unknown id {0}")]
    UnknownId(String),
    #[error("cannot encode record: {0}")]
    Encode(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReplayReport {
    pub records: usize,
    /// Set when an incomplete final line was dropped.
    pub dropped_tail: Option<String>,
}

/// Folds log text. A bad final line is dropped and reported; a bad line
/// anywhere else, or a seq that does not increase, is an error. Returns the
/// state, the report and the byte length of the valid prefix.
pub fn replay_text(path: &Path, text: &str) -> Result<(StoreState, ReplayReport, usize), StoreError> {
    let mut state = StoreState::default();
    let mut report = ReplayReport::default();
    let mut valid_len = 0;
    let mut offset = 0;
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    for (i, raw) in lines.iter().enumerate() {
        offset += raw.len();
        let line = raw.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            valid_len = offset;
            continue;
        }
        let parsed = LogRecord::from_line(line).map_err(|e| e.to_string()).and_then(|r| {
            if r.seq <= state.last_seq {
                Err(format!("seq {} does not follow {}", r.seq, state.last_seq))
            } else {
                Ok(r)
            }
        });
        match parsed {
            Ok(rec) => {
                state.apply(&rec);
                report.records += 1;
                valid_len = offset;
            }
            Err(reason) if i + 1 == lines.len() => {
                report.dropped_tail = Some(format!("line {}: {reason}", i + 1));
            }
            Err(reason) => {
                return Err(StoreError::CorruptRecord {
                    path: path.to_path_buf(),
                    line: i + 1,
                    after_seq: state.last_seq,
                    reason,
                })
            }
        }
    }
    Ok((state, report, valid_len))
}

/// Reads and folds a log without taking the writer lock.
pub fn replay(path: &Path) -> Result<(StoreState, ReplayReport), StoreError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => String::new(),
        Err(source) => {
            return Err(StoreError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    let (state, report, _) = replay_text(path, &text)?;
    Ok((state, report))
}

/// The single writer. Holds an exclusive lock on the log for its lifetime.
#[derive(Debug)]
pub struct Store {
    path: PathBuf,
    file: File,
    state: StoreState,
}

impl Store {
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, ReplayReport), StoreError> {
        let path = path.as_ref().to_path_buf();
        let io_err = |source| StoreError::Io {
            path: path.clone(),
            source,
        };
        let file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)
            .map_err(io_err)?;
        match file.try_lock() {
            Ok(()) => {}
            Err(std::fs::TryLockError::WouldBlock) => return Err(StoreError::Locked { path }),
            Err(std::fs::TryLockError::Error(e)) => return Err(io_err(e)),
        }
        // Lossy so that a torn multi-byte write in the last line is dropped
        // by replay instead of failing the read.
        let mut bytes = Vec::new();
        (&file).read_to_end(&mut bytes).map_err(io_err)?;
        let text = String::from_utf8_lossy(&bytes);
        let (state, report, valid_len) = replay_text(&path, &text)?;
        if valid_len < text.len() {
            file.set_len(valid_len as u64).map_err(io_err)?;
            file.sync_data().map_err(io_err)?;
        }
        Ok((Self { path, file, state }, report))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn state(&self) -> &StoreState {
        &self.state
    }

    /// Writes one record, syncs it to disk and folds it into the state.
    pub fn append(&mut self, record: Record, at: Timestamp) -> Result<u64, StoreError> {
        let rec = LogRecord {
            seq: self.state.last_seq + 1,
            at,
            record,
        };
        let mut line = rec.to_line()?;
        line.push('\n');
        let io_err = |source| StoreError::Io {
            path: self.path.clone(),
            source,
        };
        self.file.write_all(line.as_bytes()).map_err(io_err)?;
        self.file.sync_data().map_err(io_err)?;
        self.state.apply(&rec);
        Ok(rec.seq)
    }

    /// Appends the message unless its id is already stored.
    pub fn append_message(&mut self, message: &ChatMessage, at: Timestamp) -> Result<bool, StoreError> {
        if self.state.messages.contains_key(&message.id) {
            return Ok(false);
        }
        self.append(Record::Message(message.clone()), at)?;
        Ok(true)
    }

    /// Appends the event unless an identical record is already stored.
    pub fn upsert_event(&mut self, record: EventRecord, at: Timestamp) -> Result<bool, StoreError> {
        if self.state.events.get(&record.event.id) == Some(&record) {
            return Ok(false);
        }
        self.append(Record::Event(record), at)?;
        Ok(true)
    }

    pub fn upsert_notification(&mut self, n: Notification, at: Timestamp) -> Result<bool, StoreError> {
        if self.state.notifications.get(&n.id) == Some(&n) {
            return Ok(false);
        }
        self.append(Record::Notification(n), at)?;
        Ok(true)
    }

    /// Acknowledges a notification or an event.
    pub fn record_ack(&mut self, target: &str, at: Timestamp) -> Result<u64, StoreError> {
        if !self.state.knows(target) {
            return Err(StoreError::UnknownId(target.to_string()));
        }
        self.append(
            Record::Ack(AckRecord {
                target: target.to_string(),
            }),
            at,
        )
    }

    /// Rewrites the log with only live records, renumbered from 1.
    pub fn compact(&mut self, at: Timestamp) -> Result<usize, StoreError> {
        let io_err = |source| StoreError::Io {
            path: self.path.clone(),
            source,
        };
        let records = self.state.live_records();
        let mut tmp_name = self.path.as_os_str().to_owned();
        tmp_name.push(".compact");
        let tmp_path = PathBuf::from(tmp_name);
        let mut out = String::new();
        for (i, record) in records.iter().enumerate() {
            let line = LogRecord {
                seq: i as u64 + 1,
                at,
                record: record.clone(),
            }
            .to_line()?;
            out.push_str(&line);
            out.push('\n');
        }
        {
            let mut tmp = File::create(&tmp_path).map_err(io_err)?;
            tmp.write_all(out.as_bytes()).map_err(io_err)?;
            tmp.sync_all().map_err(io_err)?;
        }
        std::fs::rename(&tmp_path, &self.path).map_err(io_err)?;
        let file = OpenOptions::new()
            .read(true)
            .append(true)
            .open(&self.path)
            .map_err(io_err)?;
        file.lock().map_err(io_err)?;
        let (state, _, _) = replay_text(&self.path, &out)?;
        self.file = file;
        self.state = state;
        Ok(records.len())
    }
}
