//! Chat-log parsers: WhatsApp text exports and JSON lines.

use std::sync::LazyLock;

use chrono::NaiveDate;
use eventpin_core::time::{parse_timestamp, Timestamp};
use eventpin_core::{ChatMessage, DateOrder, MessageSource};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::store::{Store, StoreError};

static HEADER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(\d{1,2})/(\d{1,2})/(\d{2,4}), (\d{1,2}):(\d{2})( [ap]m)? - (.*)$").unwrap());

static SENDER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^([^:]+): (.*)$").unwrap());

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("no line looks like a WhatsApp export header")]
    EmptyInput,
}

fn header_timestamp(caps: &regex::Captures<'_>, order: DateOrder) -> Option<Timestamp> {
    let num = |i: usize| caps[i].parse::<u32>().ok();
    let (a, b) = (num(1)?, num(2)?);
    let (day, month) = match order {
        DateOrder::Dmy => (a, b),
        DateOrder::Mdy => (b, a),
    };
    let year: i32 = match caps[3].len() {
        2 => 2000 + caps[3].parse::<i32>().ok()?,
        4 => caps[3].parse().ok()?,
        _ => return None,
    };
    let mut hour = num(4)?;
    let minute = num(5)?;
    match caps.get(6).map(|m| m.as_str()) {
        Some(" am") if (1..=12).contains(&hour) => hour %= 12,
        Some(" pm") if (1..=12).contains(&hour) => hour = hour % 12 + 12,
        Some(_) => return None,
        None => {}
    }
    NaiveDate::from_ymd_opt(year, month, day)?.and_hms_opt(hour, minute, 0)
}

struct Pending {
    sender: String,
    sent_at: Timestamp,
    text: String,
}

/// One message per header line; other lines continue the previous message.
/// Headers without a `Sender: ` part are system notices and are skipped, as
/// is anything before the first header and any header whose date is invalid.
pub fn parse_whatsapp_export(
    text: &str,
    chat_id: &str,
    is_group: bool,
    order: DateOrder,
) -> Result<Vec<ChatMessage>, IngestError> {
    let mut out = Vec::new();
    let mut current: Option<Pending> = None;
    let mut saw_header = false;
    let flush = |current: &mut Option<Pending>, out: &mut Vec<ChatMessage>| {
        if let Some(p) = current.take() {
            if let Ok(m) = ChatMessage::new(
                MessageSource::WhatsappExport,
                chat_id,
                &p.sender,
                p.sent_at,
                &p.text,
                is_group,
            ) {
                out.push(m);
            }
        }
    };
    for line in text.lines() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let line = line.strip_prefix('\u{feff}').unwrap_or(line);
        let Some(caps) = HEADER.captures(line) else {
            if let Some(p) = current.as_mut() {
                p.text.push('\n');
                p.text.push_str(line);
            }
            continue;
        };
        saw_header = true;
        flush(&mut current, &mut out);
        let Some(sent_at) = header_timestamp(&caps, order) else {
            continue;
        };
        if let Some(body) = SENDER.captures(&caps[7]) {
            current = Some(Pending {
                sender: body[1].trim().to_string(),
                sent_at,
                text: body[2].to_string(),
            });
        }
    }
    flush(&mut current, &mut out);
    if !saw_header {
        return Err(IngestError::EmptyInput);
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct JsonlLine {
    chat_id: String,
    sender: String,
    sent_at: String,
    text: String,
    is_group: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct JsonlParse {
    pub messages: Vec<ChatMessage>,
    pub skipped: Vec<SkippedLine>,
}

/// Parses one message object per line. Blank lines are ignored; bad lines
/// are reported by 1-based line number and skipped.
pub fn parse_jsonl_messages(text: &str) -> JsonlParse {
    let mut out = JsonlParse::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<JsonlLine>(line)
            .map_err(|e| e.to_string())
            .and_then(|l| {
                let sent_at = parse_timestamp(&l.sent_at).map_err(|e| e.to_string())?;
                ChatMessage::new(
                    MessageSource::Jsonl,
                    &l.chat_id,
                    &l.sender,
                    sent_at,
                    &l.text,
                    l.is_group,
                )
                .map_err(|e| e.to_string())
            });
        match parsed {
            Ok(m) => out.messages.push(m),
            Err(reason) => out.skipped.push(SkippedLine { line: i + 1, reason }),
        }
    }
    out
}

/// Appends messages not already in the store; returns how many were new.
pub fn ingest_new(messages: &[ChatMessage], store: &mut Store, now: Timestamp) -> Result<usize, StoreError> {
    let mut added = 0;
    for m in messages {
        if store.append_message(m, now)? {
            added += 1;
        }
    }
    Ok(added)
}
