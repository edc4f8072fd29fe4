//! Golden (expression, reference, expected) triples for the temporal grammar.
//!
//! Each row also carries a structural reading of the phrase. The oracle below
//! resolves that reading by enumerating every calendar day in a window and
//! taking the earliest admissible one; the frozen expected value must agree
//! with both the oracle and the real scanner + resolver.

use chrono::{Datelike, Duration, NaiveDate, NaiveTime};
use eventpin_core::temporal::{scan_temporal, DateOrder, TemporalConfig};
use eventpin_core::text::ProcessedText;
use eventpin_core::time::Timestamp;
use eventpin_core::Lexicon;

#[derive(Clone, Copy, Debug)]
pub enum D {
    /// day, month, explicit year
    Dm(u32, u32, Option<i32>),
    /// days after the reference date
    Rel(i64),
    /// 0 = Monday
    Wd(u32),
}

pub type Row = (
    &'static str,
    &'static str,
    Option<D>,
    Option<(u32, u32)>,
    Option<&'static str>,
);

#[rustfmt::skip]
pub const CORPUS: &[Row] = &[
    // DAY MONTHNAME
    ("on 1 august", "2023-07-01T14:32", Some(D::Dm(1, 8, None)), None, Some("2023-08-01T09:00")),
    ("on 1 august", "2023-08-01T08:00", Some(D::Dm(1, 8, None)), None, Some("2023-08-01T09:00")),
    ("on 1 august", "2023-08-01T10:15", Some(D::Dm(1, 8, None)), None, Some("2023-08-01T10:15")),
    ("on 1 august", "2023-08-02T00:00", Some(D::Dm(1, 8, None)), None, Some("2024-08-01T09:00")),
    ("29 feb", "2023-03-01T12:00", Some(D::Dm(29, 2, None)), None, Some("2024-02-29T09:00")),
    ("29 february", "2097-03-01T12:00", Some(D::Dm(29, 2, None)), None, Some("2104-02-29T09:00")),
    ("12 dec 2025", "2023-07-01T12:00", Some(D::Dm(12, 12, Some(2025))), None, Some("2025-12-12T09:00")),
    // MONTHNAME DAY
    ("august 15", "2023-07-01T12:00", Some(D::Dm(15, 8, None)), None, Some("2023-08-15T09:00")),
    ("jan 3", "2023-12-31T23:00", Some(D::Dm(3, 1, None)), None, Some("2024-01-03T09:00")),
    ("august 15th 2024", "2023-07-01T12:00", Some(D::Dm(15, 8, Some(2024))), None, Some("2024-08-15T09:00")),
    // DAY ORDSUFFIX MONTHNAME
    ("the 3rd of march", "2023-07-01T12:00", Some(D::Dm(3, 3, None)), None, Some("2024-03-03T09:00")),
    ("21st june", "2023-06-21T07:30", Some(D::Dm(21, 6, None)), None, Some("2023-06-21T09:00")),
    // D/M[/Y]
    ("on 1/8", "2023-07-01T14:32", Some(D::Dm(1, 8, None)), None, Some("2023-08-01T09:00")),
    ("on 31/12", "2023-12-31T09:00", Some(D::Dm(31, 12, None)), None, Some("2023-12-31T09:00")),
    ("5/1/24", "2023-07-01T12:00", Some(D::Dm(5, 1, Some(2024))), None, Some("2024-01-05T09:00")),
    ("5/1/2022", "2023-07-01T12:00", Some(D::Dm(5, 1, Some(2022))), None, None),
    ("29/02/2023", "2023-01-01T12:00", None, None, None),
    // today | tomorrow | day after tomorrow
    ("today", "2023-07-01T08:00", Some(D::Rel(0)), None, Some("2023-07-01T09:00")),
    ("today", "2023-07-01T20:00", Some(D::Rel(0)), None, Some("2023-07-01T20:00")),
    ("tomorrow", "2023-12-31T23:59", Some(D::Rel(1)), None, Some("2024-01-01T09:00")),
    ("day after tomorrow", "2024-02-28T10:00", Some(D::Rel(2)), None, Some("2024-03-01T09:00")),
    // [next] WEEKDAY (2023-07-01 is a Saturday)
    ("friday", "2023-07-01T12:00", Some(D::Wd(4)), None, Some("2023-07-07T09:00")),
    ("saturday", "2023-07-01T12:00", Some(D::Wd(5)), None, Some("2023-07-08T09:00")),
    ("next sunday", "2023-07-01T12:00", Some(D::Wd(6)), None, Some("2023-07-02T09:00")),
    ("see you on mon", "2023-07-01T12:00", Some(D::Wd(0)), None, Some("2023-07-03T09:00")),
    // H am|pm
    ("at 6pm", "2023-07-01T14:32", None, Some((18, 0)), Some("2023-07-01T18:00")),
    ("at 5 pm", "2023-07-01T18:00", None, Some((17, 0)), Some("2023-07-02T17:00")),
    ("12am", "2023-07-01T12:00", None, Some((0, 0)), Some("2023-07-02T00:00")),
    ("12 pm", "2023-07-01T11:00", None, Some((12, 0)), Some("2023-07-01T12:00")),
    ("6 p.m.", "2023-07-01T11:00", None, Some((18, 0)), Some("2023-07-01T18:00")),
    // H:MM [am|pm]
    ("18:00", "2023-07-01T18:00", None, Some((18, 0)), Some("2023-07-01T18:00")),
    ("7:45 am", "2023-07-01T08:00", None, Some((7, 45)), Some("2023-07-02T07:45")),
    ("0:30", "2023-07-01T23:00", None, Some((0, 30)), Some("2023-07-02T00:30")),
    // H [in the] daypart
    ("10 in the morning", "2023-07-01T09:00", None, Some((10, 0)), Some("2023-07-01T10:00")),
    ("3 in the afternoon", "2023-07-01T09:00", None, Some((15, 0)), Some("2023-07-01T15:00")),
    ("7 evening", "2023-07-01T20:00", None, Some((19, 0)), Some("2023-07-02T19:00")),
    ("11 at night", "2023-07-01T09:00", None, None, None),
    ("11 night", "2023-07-01T09:00", None, Some((23, 0)), Some("2023-07-01T23:00")),
    ("12 in the night", "2023-07-01T09:00", None, Some((0, 0)), Some("2023-07-02T00:00")),
    // noon | midnight
    ("noon", "2023-07-01T12:00", None, Some((12, 0)), Some("2023-07-01T12:00")),
    ("midnight", "2023-07-01T12:00", None, Some((0, 0)), Some("2023-07-02T00:00")),
    // DATE [at] TIME
    ("1 august at 6pm", "2023-07-01T14:32", Some(D::Dm(1, 8, None)), Some((18, 0)), Some("2023-08-01T18:00")),
    ("tomorrow at 5", "2023-07-01T14:32", Some(D::Rel(1)), Some((5, 0)), Some("2023-07-02T05:00")),
    ("today 9:15 pm", "2023-07-01T14:32", Some(D::Rel(0)), Some((21, 15)), Some("2023-07-01T21:15")),
    ("today at 9am", "2023-07-01T14:32", Some(D::Rel(0)), Some((9, 0)), None),
    ("next fri at noon", "2023-07-01T14:32", Some(D::Wd(4)), Some((12, 0)), Some("2023-07-07T12:00")),
    // TIME [on] DATE
    ("6pm on 1 august", "2023-07-01T14:32", Some(D::Dm(1, 8, None)), Some((18, 0)), Some("2023-08-01T18:00")),
    ("10 in the morning on sat", "2023-07-01T14:32", Some(D::Wd(5)), Some((10, 0)), Some("2023-07-08T10:00")),
    ("8:30 pm 24/12", "2023-12-24T21:00", Some(D::Dm(24, 12, None)), Some((20, 30)), None),
];

/// Earliest admissible resolution by exhaustive enumeration.
pub fn oracle(date: Option<D>, time: Option<(u32, u32)>, reference: Timestamp) -> Option<Timestamp> {
    let today = reference.date();
    let window = (0..=3000).map(|n| today + Duration::days(n));
    let day = match date {
        None => None,
        Some(D::Dm(d, m, Some(y))) => Some(NaiveDate::from_ymd_opt(y, m, d)?),
        Some(D::Dm(d, m, None)) => Some(window.clone().find(|c| c.day() == d && c.month() == m)?),
        Some(D::Rel(k)) => Some(window.clone().find(|c| (*c - today).num_days() == k)?),
        Some(D::Wd(w)) => Some(
            window
                .clone()
                .skip(1)
                .find(|c| c.weekday().num_days_from_monday() == w)?,
        ),
    };
    let clock = time.map(|(h, m)| NaiveTime::from_hms_opt(h, m, 0).unwrap());
    let at = match (day, clock) {
        (Some(d), Some(t)) => d.and_time(t),
        (None, Some(t)) => window.take(2).map(|d| d.and_time(t)).find(|c| *c >= reference)?,
        (Some(d), None) => {
            let at = d.and_hms_opt(9, 0, 0).unwrap();
            if d == today && at < reference {
                reference
            } else {
                at
            }
        }
        (None, None) => return None,
    };
    (at >= reference).then_some(at)
}

pub fn resolve_phrase(phrase: &str, reference: Timestamp) -> Option<Timestamp> {
    let lexicon = Lexicon::default();
    let processed = ProcessedText::process("m", phrase, &lexicon);
    let mut found = scan_temporal(&processed.tokens, &processed.sentences, &lexicon, DateOrder::Dmy);
    assert!(found.len() <= 1, "{phrase:?} produced {} expressions", found.len());
    let mut expr = found.pop()?;
    expr.resolve(reference, &TemporalConfig::default()).ok()
}
