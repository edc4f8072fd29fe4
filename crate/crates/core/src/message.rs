use alloc::string::{String, ToString};
use serde::{Deserialize, Serialize};

use crate::digest::content_id;
use crate::time::{format_timestamp, serde_ts, truncate_to_minute, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageSource {
    WhatsappExport,
    Jsonl,
}

/// One normalized inbound chat message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub id: String,
    pub source: MessageSource,
    pub chat_id: String,
    pub sender: String,
    #[serde(with = "serde_ts")]
    pub sent_at: Timestamp,
    pub raw_text: String,
    pub is_group: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MessageError {
    #[error("message text is empty")]
    EmptyText,
    #[error("sender is empty")]
    EmptySender,
}

impl ChatMessage {
    /// Builds a message, truncating `sent_at` to the minute and deriving the id.
    pub fn new(
        source: MessageSource,
        chat_id: impl Into<String>,
        sender: impl Into<String>,
        sent_at: Timestamp,
        raw_text: impl Into<String>,
        is_group: bool,
    ) -> Result<Self, MessageError> {
        let chat_id = chat_id.into();
        let sender = sender.into().trim().to_string();
        let raw_text = raw_text.into();
        if raw_text.trim().is_empty() {
            return Err(MessageError::EmptyText);
        }
        if sender.is_empty() {
            return Err(MessageError::EmptySender);
        }
        let sent_at = truncate_to_minute(sent_at);
        let id = Self::compute_id(&chat_id, &sent_at, &sender, &raw_text);
        Ok(Self {
            id,
            source,
            chat_id,
            sender,
            sent_at,
            raw_text,
            is_group,
        })
    }

    pub fn compute_id(chat_id: &str, sent_at: &Timestamp, sender: &str, raw_text: &str) -> String {
        content_id(&[chat_id, &format_timestamp(sent_at), sender, raw_text])
    }
}
