//! Gazetteer and capitalization based entity recognition, and assembly of
//! event candidates from the recognized entities of one message.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::digest::content_id;
use crate::lexicon::Lexicon;
use crate::message::ChatMessage;
use crate::temporal::{
    describe, render_clock, resolve_date, resolve_datetime, scan_temporal, DateExpr, TemporalConfig, TemporalExpr,
    TimeExpr,
};
use crate::text::{join_surfaces, ProcessedText, Span};
use crate::time::{format_timestamp, serde_ts, Timestamp};

/// Type, date and time all stated in one sentence.
pub const CONFIDENCE_SAME_SENTENCE: f64 = 1.0;
/// Parts gathered from more than one sentence, or no date given.
pub const CONFIDENCE_CROSS_SENTENCE: f64 = 0.8;
/// No time given; the default time was used.
pub const CONFIDENCE_DEFAULT_TIME: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityKind {
    EventType,
    Person,
    Date,
    Time,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub kind: EntityKind,
    /// Token indices.
    pub token_span: Span,
    pub sentence_index: usize,
    pub surface: String,
    pub normalized: String,
    /// Index of the temporal expression a DATE or TIME entity came from.
    /// A date and a time from one combined expression share it.
    pub temporal_group: Option<usize>,
    pub date: Option<DateExpr>,
    pub time: Option<TimeExpr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventStatus {
    Active,
    Acknowledged,
    Expired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventCandidate {
    pub id: String,
    pub message_id: String,
    pub event_type: String,
    #[serde(with = "serde_ts")]
    pub occurs_at: Timestamp,
    pub participants: Vec<String>,
    pub sender: String,
    pub chat_id: String,
    pub is_group: bool,
    pub confidence: f64,
    pub status: EventStatus,
}

impl EventCandidate {
    pub fn compute_id(message_id: &str, event_type: &str, occurs_at: &Timestamp) -> String {
        content_id(&[message_id, event_type, &format_timestamp(occurs_at)])
    }

    /// Whether a real time was parsed rather than the default applied.
    pub fn has_explicit_time(&self) -> bool {
        self.confidence > CONFIDENCE_DEFAULT_TIME
    }
}

/// A temporal expression dropped during extraction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionWarning {
    pub message_id: String,
    pub expression: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub candidates: Vec<EventCandidate>,
    pub warnings: Vec<ExtractionWarning>,
}

fn is_name_like(raw: &str) -> bool {
    let mut chars = raw.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    if !first.is_uppercase() {
        return false;
    }
    // "OK", "LOL", "PM" are shouting, not names.
    let rest: Vec<char> = chars.collect();
    rest.is_empty() || rest.iter().any(|c| c.is_lowercase())
}

/// EVENT_TYPE, PERSON, DATE and TIME entities of one message, in token order.
///
/// `temporals` should already be resolved so DATE and TIME entities carry
/// their resolved rendering; unresolved ones fall back to their surface.
pub fn recognize_entities(processed: &ProcessedText, temporals: &[TemporalExpr], lexicon: &Lexicon) -> Vec<Entity> {
    let tokens = &processed.tokens;
    let mut entities = Vec::new();
    let in_temporal = |i: usize| temporals.iter().any(|t| t.span().contains(i));
    let sentence_of = |span: Span| tokens.get(span.start).map_or(0, |t| t.sentence_index);

    for (group, expr) in temporals.iter().enumerate() {
        if let Some(date) = expr.date {
            let normalized = match expr.resolved_at {
                Some(at) => at.date().format("%Y-%m-%d").to_string(),
                None => processed.surface_of(date.token_span),
            };
            entities.push(Entity {
                kind: EntityKind::Date,
                token_span: date.token_span,
                sentence_index: sentence_of(date.token_span),
                surface: processed.surface_of(date.token_span),
                normalized,
                temporal_group: Some(group),
                date: Some(date),
                time: None,
            });
        }
        if let Some(time) = expr.time {
            let normalized = match time.hour() {
                Ok(hour) if expr.resolved_at.is_some() => render_clock(hour, time.minute),
                _ => processed.surface_of(time.token_span),
            };
            entities.push(Entity {
                kind: EntityKind::Time,
                token_span: time.token_span,
                sentence_index: sentence_of(time.token_span),
                surface: processed.surface_of(time.token_span),
                normalized,
                temporal_group: Some(group),
                date: None,
                time: Some(time),
            });
        }
    }

    for &i in &processed.content_indices {
        let lemma = &processed.lemmas[i];
        if !in_temporal(i) && lexicon.is_event_type(lemma) {
            entities.push(Entity {
                kind: EntityKind::EventType,
                token_span: Span::new(i, i + 1),
                sentence_index: tokens[i].sentence_index,
                surface: tokens[i].surface.clone(),
                normalized: lemma.clone(),
                temporal_group: None,
                date: None,
                time: None,
            });
        }
    }

    let person_token = |i: usize| {
        let t = &tokens[i];
        let sentence_initial = i == 0 || tokens[i - 1].sentence_index != t.sentence_index;
        !sentence_initial
            && !in_temporal(i)
            && is_name_like(&t.raw_surface)
            && !lexicon.is_stopword(&t.surface)
            && !lexicon.is_event_type(&processed.lemmas[i])
            && lexicon.month(&t.surface).is_none()
            && lexicon.weekday(&t.surface).is_none()
    };
    let mut i = 0;
    while i < tokens.len() {
        if !person_token(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < tokens.len()
            && tokens[i + 1].sentence_index == tokens[start].sentence_index
            && person_token(i + 1)
        {
            i += 1;
        }
        let span = Span::new(start, i + 1);
        let raw: Vec<&str> = tokens[start..=i].iter().map(|t| t.raw_surface.as_str()).collect();
        let name = raw.join(" ");
        entities.push(Entity {
            kind: EntityKind::Person,
            token_span: span,
            sentence_index: tokens[start].sentence_index,
            surface: name.clone(),
            normalized: name,
            temporal_group: None,
            date: None,
            time: None,
        });
        i += 1;
    }

    entities.sort_by_key(|e| (e.token_span.start, e.kind));
    entities
}

/// Nearest entity of `kind` to `anchor`, preferring the anchor's sentence.
/// Ties go to the earlier entity.
fn nearest<'e>(entities: &'e [Entity], kind: EntityKind, anchor: &Entity) -> Option<&'e Entity> {
    let of_kind = || entities.iter().filter(move |e| e.kind == kind);
    let pick = |pool: &mut dyn Iterator<Item = &'e Entity>| {
        pool.min_by_key(|e| (e.token_span.distance(&anchor.token_span), e.token_span.start))
    };
    pick(&mut of_kind().filter(|e| e.sentence_index == anchor.sentence_index)).or_else(|| pick(&mut of_kind()))
}

/// Event type for a time: nearest to its left in the same sentence, else
/// nearest anywhere in the message.
fn event_for_time<'e>(entities: &'e [Entity], time: &Entity) -> Option<&'e Entity> {
    entities
        .iter()
        .filter(|e| {
            e.kind == EntityKind::EventType
                && e.sentence_index == time.sentence_index
                && e.token_span.end <= time.token_span.start
        })
        .max_by_key(|e| e.token_span.start)
        .or_else(|| nearest(entities, EntityKind::EventType, time))
}

fn date_for_time<'e>(entities: &'e [Entity], time: &Entity) -> Option<&'e Entity> {
    let own = entities
        .iter()
        .find(|e| e.kind == EntityKind::Date && e.temporal_group.is_some() && e.temporal_group == time.temporal_group);
    own.or_else(|| nearest(entities, EntityKind::Date, time))
}

fn warning(message: &ChatMessage, expr: &TemporalExpr, reason: impl ToString) -> ExtractionWarning {
    ExtractionWarning {
        message_id: message.id.clone(),
        expression: describe(expr),
        reason: reason.to_string(),
    }
}

/// Builds candidates from the entities of `message`.
///
/// Every TIME yields one candidate paired with its event type and date.
/// Event types no time claimed may add one default-time candidate, on a date
/// that has no candidate yet. Returns the candidates plus warnings for
/// pairings that could not be resolved.
pub fn assemble_event_candidates(
    entities: &[Entity],
    message: &ChatMessage,
    config: &TemporalConfig,
) -> (Vec<EventCandidate>, Vec<ExtractionWarning>) {
    let mut candidates: Vec<EventCandidate> = Vec::new();
    let mut warnings = Vec::new();
    let mut claimed: BTreeSet<usize> = BTreeSet::new();

    let participants: Vec<String> = {
        let mut seen = BTreeSet::new();
        entities
            .iter()
            .filter(|e| e.kind == EntityKind::Person)
            .filter(|e| seen.insert(e.surface.clone()))
            .map(|e| e.surface.clone())
            .collect()
    };
    let push = |candidates: &mut Vec<EventCandidate>, event_type: &str, occurs_at: Timestamp, confidence: f64| {
        let id = EventCandidate::compute_id(&message.id, event_type, &occurs_at);
        if candidates.iter().any(|c| c.id == id) {
            return;
        }
        candidates.push(EventCandidate {
            id,
            message_id: message.id.clone(),
            event_type: event_type.to_string(),
            occurs_at,
            participants: participants.clone(),
            sender: message.sender.clone(),
            chat_id: message.chat_id.clone(),
            is_group: message.is_group,
            confidence,
            status: EventStatus::Active,
        });
    };

    for time in entities.iter().filter(|e| e.kind == EntityKind::Time) {
        let Some(event) = event_for_time(entities, time) else {
            continue;
        };
        let date = date_for_time(entities, time);
        let expr = TemporalExpr {
            date: date.and_then(|d| d.date),
            time: time.time,
            resolved_at: None,
        };
        match resolve_datetime(&expr, message.sent_at, config) {
            Ok(occurs_at) => {
                let same_sentence = date.is_some_and(|d| {
                    d.sentence_index == time.sentence_index && event.sentence_index == time.sentence_index
                });
                let confidence = if same_sentence {
                    CONFIDENCE_SAME_SENTENCE
                } else {
                    CONFIDENCE_CROSS_SENTENCE
                };
                claimed.insert(event.token_span.start);
                push(&mut candidates, &event.normalized, occurs_at, confidence);
            }
            Err(err) => warnings.push(warning(message, &expr, err)),
        }
    }

    let mut unclaimed: Vec<(usize, usize, &Entity, NaiveDate)> = Vec::new();
    for event in entities.iter().filter(|e| e.kind == EntityKind::EventType) {
        if claimed.contains(&event.token_span.start) {
            continue;
        }
        let Some(date_entity) = nearest(entities, EntityKind::Date, event) else {
            continue;
        };
        let Some(date) = date_entity.date else { continue };
        match resolve_date(&date, message.sent_at) {
            Ok(day) => unclaimed.push((
                date_entity.token_span.distance(&event.token_span),
                event.token_span.start,
                event,
                day,
            )),
            Err(err) => {
                let expr = TemporalExpr {
                    date: Some(date),
                    time: None,
                    resolved_at: None,
                };
                warnings.push(warning(message, &expr, err));
            }
        }
    }
    unclaimed.sort_by_key(|(distance, start, _, _)| (*distance, *start));
    for (_, _, event, day) in unclaimed {
        if candidates.iter().any(|c| c.occurs_at.date() == day) {
            continue;
        }
        let expr = TemporalExpr {
            date: entities
                .iter()
                .find(|e| {
                    e.kind == EntityKind::Date && e.date.is_some_and(|d| resolve_date(&d, message.sent_at) == Ok(day))
                })
                .and_then(|e| e.date),
            time: None,
            resolved_at: None,
        };
        match resolve_datetime(&expr, message.sent_at, config) {
            Ok(occurs_at) => {
                push(&mut candidates, &event.normalized, occurs_at, CONFIDENCE_DEFAULT_TIME);
                // At most one default-time candidate per message.
                break;
            }
            Err(err) => warnings.push(warning(message, &expr, err)),
        }
    }

    (candidates, warnings)
}

/// The full extraction pipeline with its word lists and temporal settings.
#[derive(Debug, Clone, Default)]
pub struct Extractor {
    pub lexicon: Lexicon,
    pub temporal: TemporalConfig,
}

impl Extractor {
    pub fn new(lexicon: Lexicon, temporal: TemporalConfig) -> Self {
        Self { lexicon, temporal }
    }

    pub fn process(&self, message: &ChatMessage) -> ProcessedText {
        ProcessedText::process(&message.id, &message.raw_text, &self.lexicon)
    }

    /// Scans and resolves the temporal expressions of a processed message.
    /// Expressions that do not resolve are dropped with a warning.
    pub fn temporals(
        &self,
        processed: &ProcessedText,
        message: &ChatMessage,
    ) -> (Vec<TemporalExpr>, Vec<ExtractionWarning>) {
        let mut kept = Vec::new();
        let mut warnings = Vec::new();
        let scanned = scan_temporal(
            &processed.tokens,
            &processed.sentences,
            &self.lexicon,
            self.temporal.date_order,
        );
        for mut expr in scanned {
            match expr.resolve(message.sent_at, &self.temporal) {
                Ok(_) => kept.push(expr),
                Err(err) => warnings.push(ExtractionWarning {
                    message_id: message.id.clone(),
                    expression: join_surfaces(&processed.tokens[expr.span().start..expr.span().end]),
                    reason: err.to_string(),
                }),
            }
        }
        (kept, warnings)
    }

    pub fn message_to_events(&self, message: &ChatMessage) -> Extraction {
        let processed = self.process(message);
        let (temporals, mut warnings) = self.temporals(&processed, message);
        let entities = recognize_entities(&processed, &temporals, &self.lexicon);
        let (candidates, more) = assemble_event_candidates(&entities, message, &self.temporal);
        warnings.extend(more);
        Extraction { candidates, warnings }
    }
}
