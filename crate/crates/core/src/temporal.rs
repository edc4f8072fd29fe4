//! Date and time expressions over the token stream.
//!
//! The recognized grammar is closed; anything outside it is ordinary text.
//!
//! ```text
//! DATE     := DAY [st|nd|rd|th] [of] MONTH [YEAR]
//!           | MONTH DAY [st|nd|rd|th] [YEAR]
//!           | D/M[/Y]
//!           | today | tomorrow | day after tomorrow
//!           | [next] WEEKDAY
//! TIME     := H (am|pm)
//!           | H:MM [am|pm]
//!           | H[:MM] [in the] (morning|afternoon|evening|night)
//!           | noon | midnight
//!           | at H
//! COMBINED := DATE [at] TIME | TIME [on] DATE
//! ```
//!
//! Weekday abbreviations (`sat`, `sun`, `wed`, ...) are only taken after
//! `next` or `on`, since most of them are also ordinary words.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use chrono::{Datelike, Duration, NaiveDate, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::lexicon::Lexicon;
use crate::text::{Span, Token};
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DateOrder {
    /// `1/8` is the first of August.
    #[default]
    Dmy,
    /// `1/8` is the eighth of January.
    Mdy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemporalConfig {
    pub date_order: DateOrder,
    /// Time used when an event has a date but no time.
    pub default_time: NaiveTime,
}

pub const DEFAULT_EVENT_TIME: NaiveTime = match NaiveTime::from_hms_opt(9, 0, 0) {
    Some(t) => t,
    None => panic!("valid constant"),
};

impl Default for TemporalConfig {
    fn default() -> Self {
        Self {
            date_order: DateOrder::Dmy,
            default_time: DEFAULT_EVENT_TIME,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DateKind {
    AbsoluteDm,
    NumericSlash,
    RelativeDay,
    Weekday,
}

/// A recognized date. Which optional fields are set depends on `kind`;
/// the constructors are the only way to build one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateExpr {
    pub kind: DateKind,
    pub day: Option<u32>,
    pub month: Option<u32>,
    pub year: Option<i32>,
    /// Days from Monday.
    pub weekday: Option<u32>,
    pub offset_days: Option<i64>,
    pub token_span: Span,
}

/// Longest the month can be in any year.
fn max_day(month: u32) -> u32 {
    match month {
        2 => 29,
        4 | 6 | 9 | 11 => 30,
        _ => 31,
    }
}

impl DateExpr {
    /// Day and month (plus optional year). `None` when the day cannot exist
    /// in that month in any year.
    pub fn day_month(kind: DateKind, day: u32, month: u32, year: Option<i32>, span: Span) -> Option<Self> {
        if !matches!(kind, DateKind::AbsoluteDm | DateKind::NumericSlash) {
            return None;
        }
        if !(1..=12).contains(&month) || day == 0 || day > max_day(month) {
            return None;
        }
        Some(Self {
            kind,
            day: Some(day),
            month: Some(month),
            year,
            weekday: None,
            offset_days: None,
            token_span: span,
        })
    }

    pub fn relative(offset_days: i64, span: Span) -> Self {
        Self {
            kind: DateKind::RelativeDay,
            day: None,
            month: None,
            year: None,
            weekday: None,
            offset_days: Some(offset_days),
            token_span: span,
        }
    }

    pub fn weekday(days_from_monday: u32, span: Span) -> Option<Self> {
        (days_from_monday < 7).then_some(Self {
            kind: DateKind::Weekday,
            day: None,
            month: None,
            year: None,
            weekday: Some(days_from_monday),
            offset_days: None,
            token_span: span,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Daypart {
    Am,
    Pm,
    Morning,
    Afternoon,
    Evening,
    Night,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeExpr {
    /// The hour as written: 1-12 with a daypart, 0-23 without.
    pub raw_hour: u32,
    pub minute: u32,
    pub daypart: Daypart,
    pub token_span: Span,
}

impl TimeExpr {
    /// 24-hour clock hour.
    pub fn hour(&self) -> Result<u32, ResolveError> {
        let raw = self.raw_hour;
        let hour = match self.daypart {
            Daypart::Am => raw % 12,
            Daypart::Pm | Daypart::Afternoon | Daypart::Evening => raw % 12 + 12,
            Daypart::Morning if raw > 12 => return Err(ResolveError::UnresolvableTime { raw_hour: raw }),
            Daypart::Morning => raw,
            Daypart::Night if raw == 12 => 0,
            Daypart::Night => raw % 12 + 12,
            Daypart::None => raw,
        };
        if hour > 23 || self.minute > 59 {
            return Err(ResolveError::UnresolvableTime { raw_hour: raw });
        }
        Ok(hour)
    }

    pub fn clock(&self) -> Result<NaiveTime, ResolveError> {
        let hour = self.hour()?;
        NaiveTime::from_hms_opt(hour, self.minute, 0).ok_or(ResolveError::UnresolvableTime {
            raw_hour: self.raw_hour,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalExpr {
    pub date: Option<DateExpr>,
    pub time: Option<TimeExpr>,
    pub resolved_at: Option<Timestamp>,
}

impl TemporalExpr {
    pub fn span(&self) -> Span {
        match (&self.date, &self.time) {
            (Some(d), Some(t)) => Span::new(
                d.token_span.start.min(t.token_span.start),
                d.token_span.end.max(t.token_span.end),
            ),
            (Some(d), None) => d.token_span,
            (None, Some(t)) => t.token_span,
            (None, None) => Span::new(0, 0),
        }
    }

    /// Fills `resolved_at`.
    pub fn resolve(&mut self, reference: Timestamp, config: &TemporalConfig) -> Result<Timestamp, ResolveError> {
        let at = resolve_datetime(self, reference, config)?;
        self.resolved_at = Some(at);
        Ok(at)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("no such date: {day}/{month}/{year}")]
    InvalidDate { day: u32, month: u32, year: i32 },
    #[error("hour {raw_hour} cannot be read with its daypart")]
    UnresolvableTime { raw_hour: u32 },
    #[error("expression resolves to {resolved}, before the message was sent")]
    BeforeReference { resolved: Timestamp },
    #[error("expression has neither a date nor a time")]
    Empty,
}

// ---------------------------------------------------------------------------
// Scanning

struct Scanner<'a> {
    tokens: &'a [Token],
    sentences: &'a [String],
    lexicon: &'a Lexicon,
    order: DateOrder,
}

fn digits(s: &str) -> Option<u32> {
    if s.is_empty() || s.len() > 4 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl<'a> Scanner<'a> {
    fn word(&self, i: usize) -> Option<&'a str> {
        self.tokens.get(i).map(|t| t.surface.as_str())
    }

    fn same_sentence(&self, a: usize, b: usize) -> bool {
        match (self.tokens.get(a), self.tokens.get(b)) {
            (Some(x), Some(y)) => x.sentence_index == y.sentence_index,
            _ => false,
        }
    }

    /// Word at `i` if it continues the sentence of token `prev`.
    fn next_word(&self, prev: usize, i: usize) -> Option<&'a str> {
        if self.same_sentence(prev, i) {
            self.word(i)
        } else {
            None
        }
    }

    /// The text between tokens `i` and `i + 1` of one sentence.
    fn glue(&self, i: usize) -> Option<&'a str> {
        let (a, b) = (self.tokens.get(i)?, self.tokens.get(i + 1)?);
        if a.sentence_index != b.sentence_index {
            return None;
        }
        let sentence = self.sentences.get(a.sentence_index)?;
        let start = sentence.char_indices().nth(a.char_span.end).map(|(b, _)| b)?;
        let end = sentence
            .char_indices()
            .nth(b.char_span.start)
            .map(|(b, _)| b)
            .unwrap_or(sentence.len());
        sentence.get(start..end)
    }

    fn number(&self, i: usize, max_len: usize) -> Option<u32> {
        let w = self.word(i)?;
        if w.len() > max_len {
            return None;
        }
        digits(w)
    }

    fn year_at(&self, prev: usize, i: usize) -> Option<i32> {
        let w = self.next_word(prev, i)?;
        if w.len() != 4 {
            return None;
        }
        let y = digits(w)?;
        (1900..=2999).contains(&y).then_some(y as i32)
    }

    fn day_at(&self, i: usize) -> Option<u32> {
        self.number(i, 2).filter(|d| (1..=31).contains(d))
    }

    fn ordinal_after(&self, prev: usize, i: usize) -> bool {
        matches!(self.next_word(prev, i), Some("st" | "nd" | "rd" | "th")) && self.glue(prev).is_some_and(str::is_empty)
    }

    fn match_date(&self, i: usize) -> Option<(DateExpr, usize)> {
        [
            self.day_month_name(i),
            self.month_name_day(i),
            self.numeric_slash(i),
            self.relative_day(i),
            self.named_weekday(i),
        ]
        .into_iter()
        .flatten()
        .max_by_key(|(_, end)| *end)
    }

    // DAY [ORD] [of] MONTH [YEAR]
    fn day_month_name(&self, i: usize) -> Option<(DateExpr, usize)> {
        let day = self.day_at(i)?;
        let mut j = i + 1;
        if self.ordinal_after(i, j) {
            j += 1;
        }
        if self.next_word(i, j) == Some("of") {
            j += 1;
        }
        let month = self.lexicon.month(self.next_word(i, j)?)?;
        j += 1;
        let year = self.year_at(i, j);
        if year.is_some() {
            j += 1;
        }
        DateExpr::day_month(DateKind::AbsoluteDm, day, month, year, Span::new(i, j)).map(|d| (d, j))
    }

    // MONTH DAY [ORD] [YEAR]
    fn month_name_day(&self, i: usize) -> Option<(DateExpr, usize)> {
        let month = self.lexicon.month(self.word(i)?)?;
        self.next_word(i, i + 1)?;
        let day = self.day_at(i + 1)?;
        let mut j = i + 2;
        if self.ordinal_after(i + 1, j) {
            j += 1;
        }
        let year = self.year_at(i, j);
        if year.is_some() {
            j += 1;
        }
        DateExpr::day_month(DateKind::AbsoluteDm, day, month, year, Span::new(i, j)).map(|d| (d, j))
    }

    // D/M[/Y]
    fn numeric_slash(&self, i: usize) -> Option<(DateExpr, usize)> {
        let first = self.number(i, 2)?;
        if self.glue(i)? != "/" {
            return None;
        }
        let second = self.number(i + 1, 2)?;
        let mut j = i + 2;
        let mut year = None;
        if self.glue(i + 1) == Some("/") {
            let w = self.word(i + 2)?;
            let y = digits(w)?;
            year = Some(match w.len() {
                2 => 2000 + y as i32,
                4 => y as i32,
                _ => return None,
            });
            j += 1;
        }
        let (day, month) = match self.order {
            DateOrder::Dmy => (first, second),
            DateOrder::Mdy => (second, first),
        };
        DateExpr::day_month(DateKind::NumericSlash, day, month, year, Span::new(i, j)).map(|d| (d, j))
    }

    fn relative_day(&self, i: usize) -> Option<(DateExpr, usize)> {
        match self.word(i)? {
            "today" => Some((DateExpr::relative(0, Span::new(i, i + 1)), i + 1)),
            "tomorrow" => Some((DateExpr::relative(1, Span::new(i, i + 1)), i + 1)),
            "day" if self.next_word(i, i + 1) == Some("after") && self.next_word(i, i + 2) == Some("tomorrow") => {
                Some((DateExpr::relative(2, Span::new(i, i + 3)), i + 3))
            }
            _ => None,
        }
    }

    // [next] WEEKDAY
    fn named_weekday(&self, i: usize) -> Option<(DateExpr, usize)> {
        let (name_at, has_next) = if self.word(i)? == "next" {
            self.next_word(i, i + 1)?;
            (i + 1, true)
        } else {
            (i, false)
        };
        let name = self.word(name_at)?;
        let weekday = self.lexicon.weekday(name)?;
        if name.len() <= 3 {
            let after_on = i > 0 && self.same_sentence(i - 1, i) && self.word(i - 1) == Some("on");
            if !has_next && !after_on {
                return None;
            }
        }
        DateExpr::weekday(weekday, Span::new(i, name_at + 1)).map(|d| (d, name_at + 1))
    }

    fn daypart_word(w: &str) -> Option<Daypart> {
        Some(match w {
            "morning" => Daypart::Morning,
            "afternoon" => Daypart::Afternoon,
            "evening" => Daypart::Evening,
            "night" => Daypart::Night,
            _ => return None,
        })
    }

    fn match_time(&self, i: usize) -> Option<(TimeExpr, usize)> {
        let w = self.word(i)?;
        let named = match w {
            "noon" => Some(12),
            "midnight" => Some(0),
            _ => None,
        };
        if let Some(hour) = named {
            return Some((
                TimeExpr {
                    raw_hour: hour,
                    minute: 0,
                    daypart: Daypart::None,
                    token_span: Span::new(i, i + 1),
                },
                i + 1,
            ));
        }
        let hour = self.number(i, 2)?;
        let mut j = i + 1;
        let mut minute = None;
        if self.glue(i) == Some(":") {
            let mm = self.word(i + 1)?;
            if mm.len() != 2 {
                return None;
            }
            minute = Some(digits(mm).filter(|m| *m <= 59)?);
            j += 1;
        }
        let build = |daypart, end: usize| {
            Some((
                TimeExpr {
                    raw_hour: hour,
                    minute: minute.unwrap_or(0),
                    daypart,
                    token_span: Span::new(i, end),
                },
                end,
            ))
        };
        let twelve_hour = (1..=12).contains(&hour);
        match self.next_word(i, j) {
            Some("am") if twelve_hour => return build(Daypart::Am, j + 1),
            Some("pm") if twelve_hour => return build(Daypart::Pm, j + 1),
            _ => {}
        }
        let mut k = j;
        if self.next_word(i, k) == Some("in") && self.next_word(i, k + 1) == Some("the") {
            k += 2;
        }
        if let Some(part) = self.next_word(i, k).and_then(Self::daypart_word) {
            if hour <= 23 {
                return build(part, k + 1);
            }
        }
        if hour > 23 {
            return None;
        }
        if minute.is_some() {
            return build(Daypart::None, j);
        }
        let preceded_by_at = i > 0 && self.same_sentence(i - 1, i) && self.word(i - 1) == Some("at");
        if preceded_by_at {
            return build(Daypart::None, j);
        }
        None
    }

    /// Index after an optional connective `word` at `at`, or `at` itself.
    /// Either way the returned index continues the sentence of `at - 1`.
    fn after_optional(&self, at: usize, word: &str) -> Option<usize> {
        if at == 0 || !self.same_sentence(at - 1, at) {
            return None;
        }
        if self.word(at) == Some(word) {
            self.same_sentence(at, at + 1).then_some(at + 1)
        } else {
            Some(at)
        }
    }

    fn longest_at(&self, i: usize) -> Option<(TemporalExpr, usize)> {
        let mut best: Option<(TemporalExpr, usize)> = None;
        let mut consider = |date: Option<DateExpr>, time: Option<TimeExpr>, end: usize| {
            if best.as_ref().is_none_or(|(_, e)| end > *e) {
                best = Some((
                    TemporalExpr {
                        date,
                        time,
                        resolved_at: None,
                    },
                    end,
                ));
            }
        };
        if let Some((date, end)) = self.match_date(i) {
            consider(Some(date), None, end);
            if let Some((time, tend)) = self.after_optional(end, "at").and_then(|k| self.match_time(k)) {
                consider(Some(date), Some(time), tend);
            }
        }
        if let Some((time, end)) = self.match_time(i) {
            consider(None, Some(time), end);
            if let Some((date, dend)) = self.after_optional(end, "on").and_then(|k| self.match_date(k)) {
                consider(Some(date), Some(time), dend);
            }
        }
        best
    }
}

/// Left-to-right longest match over the whole message's token stream.
/// `sentences` are the cleaned sentences the tokens were cut from; they
/// supply the `:` and `/` between numbers. Matches never cross sentences.
pub fn scan_temporal(tokens: &[Token], sentences: &[String], lexicon: &Lexicon, order: DateOrder) -> Vec<TemporalExpr> {
    let scanner = Scanner {
        tokens,
        sentences,
        lexicon,
        order,
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        match scanner.longest_at(i) {
            Some((expr, end)) => {
                out.push(expr);
                i = end;
            }
            None => i += 1,
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Resolution

/// Years searched forward for a yearless day/month. Long enough to reach the
/// next 29 February across a skipped century leap year.
const YEARLESS_HORIZON: i32 = 8;

pub fn resolve_date(date: &DateExpr, reference: Timestamp) -> Result<NaiveDate, ResolveError> {
    let today = reference.date();
    match date.kind {
        DateKind::AbsoluteDm | DateKind::NumericSlash => {
            let (day, month) = (date.day.unwrap_or(0), date.month.unwrap_or(0));
            match date.year {
                Some(year) => {
                    NaiveDate::from_ymd_opt(year, month, day).ok_or(ResolveError::InvalidDate { day, month, year })
                }
                None => (today.year()..=today.year() + YEARLESS_HORIZON)
                    .filter_map(|y| NaiveDate::from_ymd_opt(y, month, day))
                    .find(|d| *d >= today)
                    .ok_or(ResolveError::InvalidDate {
                        day,
                        month,
                        year: today.year(),
                    }),
            }
        }
        DateKind::RelativeDay => Ok(today + Duration::days(date.offset_days.unwrap_or(0))),
        DateKind::Weekday => {
            let target = date.weekday.unwrap_or(0) as i64;
            let current = today.weekday().num_days_from_monday() as i64;
            let ahead = match (target - current).rem_euclid(7) {
                0 => 7,
                n => n,
            };
            Ok(today + Duration::days(ahead))
        }
    }
}

/// Resolves a date and/or time to an absolute timestamp.
///
/// A time without a date lands on the reference day when it has not passed
/// yet, else on the next day. A date without a time gets the configured
/// default time, moved up to the reference itself when that default has
/// already passed on the reference day. Anything else that ends up before
/// the reference is rejected.
pub fn resolve_datetime(
    expr: &TemporalExpr,
    reference: Timestamp,
    config: &TemporalConfig,
) -> Result<Timestamp, ResolveError> {
    let at = match (&expr.date, &expr.time) {
        (None, None) => return Err(ResolveError::Empty),
        (Some(date), Some(time)) => resolve_date(date, reference)?.and_time(time.clock()?),
        (None, Some(time)) => {
            let same_day = reference.date().and_time(time.clock()?);
            if same_day >= reference {
                same_day
            } else {
                same_day + Duration::days(1)
            }
        }
        (Some(date), None) => {
            let day = resolve_date(date, reference)?;
            let at = day.and_time(config.default_time);
            if day == reference.date() && at < reference {
                reference
            } else {
                at
            }
        }
    };
    if at < reference {
        return Err(ResolveError::BeforeReference { resolved: at });
    }
    Ok(at)
}

/// Surface rendering used for DATE entity values and round-trip checks.
pub fn render_day_month(date: NaiveDate) -> String {
    const NAMES: [&str; 12] = [
        "january",
        "february",
        "march",
        "april",
        "may",
        "june",
        "july",
        "august",
        "september",
        "october",
        "november",
        "december",
    ];
    alloc::format!("{} {}", date.day(), NAMES[date.month0() as usize])
}

pub fn render_clock(hour: u32, minute: u32) -> String {
    alloc::format!("{hour:02}:{minute:02}")
}

impl core::fmt::Display for DateExpr {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.kind {
            DateKind::RelativeDay => write!(f, "+{}d", self.offset_days.unwrap_or(0)),
            DateKind::Weekday => write!(f, "weekday {}", self.weekday.unwrap_or(0)),
            _ => {
                write!(f, "{}/{}", self.day.unwrap_or(0), self.month.unwrap_or(0))?;
                if let Some(y) = self.year {
                    write!(f, "/{y}")?;
                }
                Ok(())
            }
        }
    }
}

impl Daypart {
    pub fn as_str(&self) -> &'static str {
        match self {
            Daypart::Am => "am",
            Daypart::Pm => "pm",
            Daypart::Morning => "morning",
            Daypart::Afternoon => "afternoon",
            Daypart::Evening => "evening",
            Daypart::Night => "night",
            Daypart::None => "",
        }
    }
}

pub(crate) fn describe(expr: &TemporalExpr) -> String {
    let mut out = String::new();
    if let Some(d) = &expr.date {
        out.push_str(&d.to_string());
    }
    if let Some(t) = &expr.time {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&alloc::format!("{}:{:02}{}", t.raw_hour, t.minute, t.daypart.as_str()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{segment_sentences, tokenize};
    use crate::time::parse_timestamp;
    use alloc::vec;

    fn at(s: &str) -> Timestamp {
        parse_timestamp(s).unwrap()
    }

    fn scan(text: &str) -> Vec<TemporalExpr> {
        let sentences = segment_sentences(text);
        let tokens: Vec<Token> = sentences.iter().enumerate().flat_map(|(i, s)| tokenize(s, i)).collect();
        scan_temporal(&tokens, &sentences, &Lexicon::default(), DateOrder::Dmy)
    }

    #[test]
    fn invitation_first_sentence_date() {
        let found = scan("I am inviting you my brother's wedding which is on 1 august");
        assert_eq!(found.len(), 1);
        let d = found[0].date.unwrap();
        assert_eq!((d.kind, d.day, d.month), (DateKind::AbsoluteDm, Some(1), Some(8)));
        assert_eq!(d.token_span, Span::new(11, 13));
        assert!(found[0].time.is_none());
    }

    #[test]
    fn invitation_second_sentence_times() {
        let found = scan("The reception starts at 6pm and the marriage starts at 10 in the morning");
        assert_eq!(found.len(), 2);
        let six = found[0].time.unwrap();
        assert_eq!(
            (six.raw_hour, six.daypart, six.token_span),
            (6, Daypart::Pm, Span::new(4, 6))
        );
        let ten = found[1].time.unwrap();
        assert_eq!(
            (ten.raw_hour, ten.daypart, ten.token_span),
            (10, Daypart::Morning, Span::new(11, 15))
        );
        assert!(found.iter().all(|t| t.date.is_none()));
    }

    #[test]
    fn relative_and_combined() {
        let found = scan("see you tomorrow");
        assert_eq!(found[0].date.unwrap().offset_days, Some(1));
        let found = scan("tomorrow at 5");
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].date.unwrap().offset_days, Some(1));
        assert_eq!(found[0].time.unwrap().raw_hour, 5);
        let found = scan("6pm on 1 august");
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].span(), Span::new(0, 5));
    }

    #[test]
    fn matches_do_not_cross_sentences() {
        let found = scan("Party at 6.\nAugust 1 works");
        assert_eq!(found.len(), 2);
        assert!(found[0].date.is_none());
        assert!(found[1].time.is_none());
    }

    #[test]
    fn weekday_abbreviations_need_a_cue() {
        assert!(scan("we sat down").is_empty());
        assert_eq!(scan("party on sat")[0].date.unwrap().weekday, Some(5));
        assert_eq!(scan("next fri")[0].date.unwrap().weekday, Some(4));
        assert_eq!(scan("see you friday")[0].date.unwrap().weekday, Some(4));
    }

    #[test]
    fn impossible_day_rejected_at_parse() {
        assert!(scan("30 february").is_empty());
        assert!(scan("31/04").is_empty());
        assert_eq!(scan("29 feb").len(), 1);
    }

    #[test]
    fn hour_rules() {
        let t = |raw_hour, daypart| TimeExpr {
            raw_hour,
            minute: 0,
            daypart,
            token_span: Span::new(0, 1),
        };
        assert_eq!(t(12, Daypart::Am).hour(), Ok(0));
        assert_eq!(t(12, Daypart::Pm).hour(), Ok(12));
        assert_eq!(t(6, Daypart::Evening).hour(), Ok(18));
        assert_eq!(t(10, Daypart::Morning).hour(), Ok(10));
        assert_eq!(t(12, Daypart::Night).hour(), Ok(0));
        assert_eq!(t(11, Daypart::Night).hour(), Ok(23));
        assert_eq!(t(18, Daypart::None).hour(), Ok(18));
        assert_eq!(
            t(14, Daypart::Morning).hour(),
            Err(ResolveError::UnresolvableTime { raw_hour: 14 })
        );
    }

    #[test]
    fn resolve_date_examples() {
        let aug1 = DateExpr::day_month(DateKind::AbsoluteDm, 1, 8, None, Span::new(0, 2)).unwrap();
        assert_eq!(
            resolve_date(&aug1, at("2023-07-01T14:32")),
            Ok(NaiveDate::from_ymd_opt(2023, 8, 1).unwrap())
        );
        assert_eq!(
            resolve_date(&aug1, at("2023-08-01T23:00")),
            Ok(NaiveDate::from_ymd_opt(2023, 8, 1).unwrap())
        );
        assert_eq!(
            resolve_date(&aug1, at("2023-08-02T00:00")),
            Ok(NaiveDate::from_ymd_opt(2024, 8, 1).unwrap())
        );
        let today = DateExpr::relative(0, Span::new(0, 1));
        assert_eq!(
            resolve_date(&today, at("2023-07-01T10:00")),
            Ok(NaiveDate::from_ymd_opt(2023, 7, 1).unwrap())
        );
    }

    #[test]
    fn explicit_year_can_be_invalid() {
        let leap = DateExpr::day_month(DateKind::NumericSlash, 29, 2, Some(2023), Span::new(0, 3)).unwrap();
        assert_eq!(
            resolve_date(&leap, at("2023-01-01T00:00")),
            Err(ResolveError::InvalidDate {
                day: 29,
                month: 2,
                year: 2023
            })
        );
    }

    #[test]
    fn resolve_datetime_examples() {
        let cfg = TemporalConfig::default();
        let reference = at("2023-07-01T14:32");
        let aug1 = DateExpr::day_month(DateKind::AbsoluteDm, 1, 8, None, Span::new(0, 2)).unwrap();
        let six_pm = TimeExpr {
            raw_hour: 6,
            minute: 0,
            daypart: Daypart::Pm,
            token_span: Span::new(2, 4),
        };
        let ten_morning = TimeExpr {
            raw_hour: 10,
            minute: 0,
            daypart: Daypart::Morning,
            token_span: Span::new(2, 6),
        };
        let both = |time| TemporalExpr {
            date: Some(aug1),
            time: Some(time),
            resolved_at: None,
        };
        assert_eq!(
            resolve_datetime(&both(six_pm), reference, &cfg),
            Ok(at("2023-08-01T18:00"))
        );
        assert_eq!(
            resolve_datetime(&both(ten_morning), reference, &cfg),
            Ok(at("2023-08-01T10:00"))
        );
        let five_pm = TimeExpr {
            raw_hour: 5,
            minute: 0,
            daypart: Daypart::Pm,
            token_span: Span::new(0, 2),
        };
        let only_time = TemporalExpr {
            date: None,
            time: Some(five_pm),
            resolved_at: None,
        };
        assert_eq!(
            resolve_datetime(&only_time, at("2023-07-01T18:00"), &cfg),
            Ok(at("2023-07-02T17:00"))
        );
        assert_eq!(
            resolve_datetime(&only_time, at("2023-07-01T17:00"), &cfg),
            Ok(at("2023-07-01T17:00"))
        );
    }

    #[test]
    fn date_only_today_never_precedes_reference() {
        let cfg = TemporalConfig::default();
        let today = TemporalExpr {
            date: Some(DateExpr::relative(0, Span::new(0, 1))),
            time: None,
            resolved_at: None,
        };
        assert_eq!(
            resolve_datetime(&today, at("2023-07-01T14:32"), &cfg),
            Ok(at("2023-07-01T14:32"))
        );
        assert_eq!(
            resolve_datetime(&today, at("2023-07-01T07:00"), &cfg),
            Ok(at("2023-07-01T09:00"))
        );
    }

    #[test]
    fn passed_explicit_time_today_is_rejected() {
        let cfg = TemporalConfig::default();
        let found = scan("today at 9am");
        assert!(matches!(
            resolve_datetime(&found[0], at("2023-07-01T14:32"), &cfg),
            Err(ResolveError::BeforeReference { .. })
        ));
    }

    #[test]
    fn renders_day_month() {
        assert_eq!(
            render_day_month(NaiveDate::from_ymd_opt(2023, 8, 1).unwrap()),
            "1 august"
        );
        assert_eq!(render_clock(9, 5), "09:05");
        assert_eq!(vec![describe(&scan("1/8 at 6:30pm")[0])], ["1/8 6:30pm"]);
    }
}
