#![allow(dead_code)]

use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use eventpin::sink::{Delivery, Sink, SinkFailure};
use eventpin::{Service, Store};
use eventpin_core::time::{parse_timestamp, Timestamp};
use eventpin_core::{ChatMessage, Extractor, MessageSource};

pub const INVITATION: &str = "I am inviting you my brother's wedding which is on 1 august.\nThe reception starts at 6pm and the marriage starts at 10 in the morning.";

pub fn ts(s: &str) -> Timestamp {
    parse_timestamp(s).unwrap()
}

pub fn message(chat: &str, sender: &str, sent_at: &str, text: &str, group: bool) -> ChatMessage {
    ChatMessage::new(MessageSource::Jsonl, chat, sender, ts(sent_at), text, group).unwrap()
}

/// Keeps every delivery; fails while `down` is set.
#[derive(Clone, Default)]
pub struct Recorder {
    pub seen: Arc<Mutex<Vec<Delivery>>>,
    pub down: Arc<AtomicBool>,
}

impl Recorder {
    pub fn set_down(&self, down: bool) {
        self.down.store(down, Ordering::SeqCst);
    }

    pub fn ids(&self) -> Vec<String> {
        self.seen
            .lock()
            .unwrap()
            .iter()
            .map(|d| d.notification_id.clone())
            .collect()
    }
}

impl Sink for Recorder {
    fn name(&self) -> &str {
        "recorder"
    }

    fn deliver(&self, delivery: &Delivery) -> Result<(), SinkFailure> {
        if self.down.load(Ordering::SeqCst) {
            return Err(SinkFailure {
                sink: "recorder".into(),
                reason: "down".into(),
            });
        }
        self.seen.lock().unwrap().push(delivery.clone());
        Ok(())
    }
}

pub fn service_at(path: &Path, sink: &Recorder) -> Service {
    let (store, _) = Store::open(path).unwrap();
    Service::new(store, Extractor::default(), 5)
        .unwrap()
        .with_sink(Box::new(sink.clone()))
}
