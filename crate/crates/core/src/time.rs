//! Local-naive timestamps and their text form.
//!
//! Timestamps carry no zone. The canonical rendering is ISO-8601 at minute
//! precision (`2023-07-01T14:32`); seconds and fractions are only written
//! when present, so every rendered value parses back to itself.

use alloc::string::String;
use chrono::{NaiveDateTime, Timelike};

pub type Timestamp = NaiveDateTime;

const MINUTE_FORMAT: &str = "%Y-%m-%dT%H:%M";
const SECOND_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";
const FRACTION_FORMAT: &str = "%Y-%m-%dT%H:%M:%S%.f";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid timestamp {input:?}: expected YYYY-MM-DDTHH:MM[:SS]")]
pub struct TimestampError {
    pub input: String,
}

pub fn parse_timestamp(input: &str) -> Result<Timestamp, TimestampError> {
    let trimmed = input.trim();
    [MINUTE_FORMAT, SECOND_FORMAT, FRACTION_FORMAT]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(trimmed, fmt).ok())
        .ok_or_else(|| TimestampError { input: input.into() })
}

pub fn format_timestamp(ts: &Timestamp) -> String {
    let fmt = if ts.nanosecond() != 0 {
        FRACTION_FORMAT
    } else if ts.second() != 0 {
        SECOND_FORMAT
    } else {
        MINUTE_FORMAT
    };
    alloc::format!("{}", ts.format(fmt))
}

/// Drops seconds and sub-second precision.
pub fn truncate_to_minute(ts: Timestamp) -> Timestamp {
    ts.with_second(0).and_then(|t| t.with_nanosecond(0)).unwrap_or(ts)
}

/// Serde adapter using [`format_timestamp`] / [`parse_timestamp`].
pub mod serde_ts {
    use super::{format_timestamp, parse_timestamp, Timestamp};
    use alloc::string::String;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &Timestamp, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_timestamp(ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Timestamp, D::Error> {
        let raw = String::deserialize(d)?;
        parse_timestamp(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    #[test]
    fn minute_form_round_trips() {
        let ts = parse_timestamp("2023-07-01T14:32").unwrap();
        assert_eq!(
            ts,
            NaiveDate::from_ymd_opt(2023, 7, 1)
                .unwrap()
                .and_hms_opt(14, 32, 0)
                .unwrap()
        );
        assert_eq!(format_timestamp(&ts), "2023-07-01T14:32");
    }

    #[test]
    fn seconds_are_kept_when_present() {
        let ts = parse_timestamp("2023-07-01T14:32:05").unwrap();
        assert_eq!(format_timestamp(&ts), "2023-07-01T14:32:05");
        assert_eq!(format_timestamp(&truncate_to_minute(ts)), "2023-07-01T14:32");
    }

    #[test]
    fn rejects_zoned_and_garbage() {
        assert!(parse_timestamp("2023-07-01T14:32Z").is_err());
        assert!(parse_timestamp("yesterday").is_err());
    }
}
