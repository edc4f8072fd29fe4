//! Word lists that drive the text pipeline and the rule-based recognizers.
//!
//! The built-in lists are compiled in from `data/`; each can be replaced
//! with the same file format at runtime.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub const STOPWORDS: &str = include_str!("../data/stopwords.txt");
pub const IRREGULAR_LEMMAS: &str = include_str!("../data/irregular_lemmas.tsv");
pub const EVENT_GAZETTEER: &str = include_str!("../data/event_gazetteer.txt");
pub const MONTHS: &str = include_str!("../data/months.tsv");
pub const WEEKDAYS: &str = include_str!("../data/weekdays.tsv");
pub const SEED_EXAMPLES: &str = include_str!("../data/seed_examples.jsonl");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct LexiconError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    stopwords: BTreeSet<String>,
    irregulars: BTreeMap<String, String>,
    gazetteer: BTreeSet<String>,
    months: BTreeMap<String, u32>,
    weekdays: BTreeMap<String, u32>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Self {
            stopwords: parse_word_list(STOPWORDS),
            irregulars: parse_pairs(IRREGULAR_LEMMAS)
                .expect("built-in lemma table")
                .into_iter()
                .collect(),
            gazetteer: parse_word_list(EVENT_GAZETTEER),
            months: parse_numbered(MONTHS, 1..=12).expect("built-in month table"),
            weekdays: parse_numbered(WEEKDAYS, 0..=6).expect("built-in weekday table"),
        }
    }
}

impl Lexicon {
    pub fn with_stopwords(mut self, words: BTreeSet<String>) -> Self {
        self.stopwords = words;
        self
    }

    pub fn with_irregulars(mut self, table: BTreeMap<String, String>) -> Self {
        self.irregulars = table;
        self
    }

    pub fn with_gazetteer(mut self, lemmas: BTreeSet<String>) -> Self {
        self.gazetteer = lemmas;
        self
    }

    pub fn is_stopword(&self, surface: &str) -> bool {
        self.stopwords.contains(surface)
    }

    pub fn irregular(&self, form: &str) -> Option<&str> {
        self.irregulars.get(form).map(String::as_str)
    }

    pub fn irregulars(&self) -> impl Iterator<Item = (&str, &str)> {
        self.irregulars.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_event_type(&self, lemma: &str) -> bool {
        self.gazetteer.contains(lemma)
    }

    pub fn event_types(&self) -> impl Iterator<Item = &str> {
        self.gazetteer.iter().map(String::as_str)
    }

    /// Month number (1-12) for a lowercase full name or abbreviation.
    pub fn month(&self, name: &str) -> Option<u32> {
        self.months.get(name).copied()
    }

    /// Days from Monday (0-6) for a lowercase full name or abbreviation.
    pub fn weekday(&self, name: &str) -> Option<u32> {
        self.weekdays.get(name).copied()
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let line = line.trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

/// One word per line, `#` comments, lowercased.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    content_lines(text).map(|(_, w)| w.to_lowercase()).collect()
}

/// `form<TAB>lemma` per line.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, LexiconError> {
    content_lines(text)
        .map(|(line, content)| {
            let mut cols = content.split('\t').map(str::trim);
            match (cols.next(), cols.next(), cols.next()) {
                (Some(form), Some(lemma), None) if !form.is_empty() && !lemma.is_empty() => {
                    Ok((form.to_lowercase(), lemma.to_lowercase()))
                }
                _ => Err(LexiconError {
                    line,
                    reason: "expected exactly two tab-separated columns".to_string(),
                }),
            }
        })
        .collect()
}

fn parse_numbered(text: &str, range: core::ops::RangeInclusive<u32>) -> Result<BTreeMap<String, u32>, LexiconError> {
    let mut out = BTreeMap::new();
    for (line, content) in content_lines(text) {
        let (name, number) = content.split_once('\t').ok_or_else(|| LexiconError {
            line,
            reason: "expected name<TAB>number".to_string(),
        })?;
        let value: u32 = number.trim().parse().map_err(|_| LexiconError {
            line,
            reason: alloc::format!("not a number: {number:?}"),
        })?;
        if !range.contains(&value) {
            return Err(LexiconError {
                line,
                reason: alloc::format!("{value} out of range"),
            });
        }
        out.insert(name.trim().to_lowercase(), value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_tables_load() {
        let lex = Lexicon::default();
        for w in ["the", "is", "was", "in"] {
            assert!(lex.is_stopword(w), "{w}");
        }
        assert!(!lex.is_stopword("s"));
        assert_eq!(lex.irregular("drove"), Some("drive"));
        assert!(lex.is_event_type("wedding"));
        assert_eq!(lex.event_types().count(), 20);
        assert_eq!(lex.month("aug"), Some(8));
        assert_eq!(lex.weekday("friday"), Some(4));
        let stopwords = parse_word_list(STOPWORDS).len();
        assert!((55..=75).contains(&stopwords), "{stopwords}");
    }

    #[test]
    fn pair_parser_reports_line() {
        let err = parse_pairs("# c\ngood\tok\nbad line\n").unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn word_list_strips_comments() {
        let words = parse_word_list("# heading\nFoo  # trailing\n\nbar\n");
        assert_eq!(words.into_iter().collect::<Vec<_>>(), ["bar", "foo"]);
    }
}
