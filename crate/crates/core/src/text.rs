//! Cleaning, sentence segmentation, tokenization, stopword filtering and
//! lemmatization of message text.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::lexicon::Lexicon;

/// Half-open `[start, end)` range. Character offsets for token spans inside
/// a sentence, token indices for entity and temporal spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index < self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Token gap between two disjoint spans (0 when adjacent).
    pub fn distance(&self, other: &Span) -> usize {
        other
            .start
            .saturating_sub(self.end)
            .max(self.start.saturating_sub(other.end))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub raw_surface: String,
    /// Character offsets into the cleaned sentence.
    pub char_span: Span,
    pub sentence_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessedText {
    pub message_id: String,
    pub cleaned: String,
    pub sentences: Vec<String>,
    pub tokens: Vec<Token>,
    pub content_indices: Vec<usize>,
    pub lemmas: Vec<String>,
}

impl ProcessedText {
    /// Runs the whole pipeline over one raw message.
    pub fn process(message_id: &str, raw: &str, lexicon: &Lexicon) -> Self {
        let sentences = segment_sentences(raw);
        let tokens: Vec<Token> = sentences.iter().enumerate().flat_map(|(i, s)| tokenize(s, i)).collect();
        let content_indices = remove_stopwords(&tokens, lexicon);
        let lemmas = tokens.iter().map(|t| lemmatize(&t.surface, lexicon)).collect();
        Self {
            message_id: message_id.to_string(),
            cleaned: clean_text(raw),
            sentences,
            tokens,
            content_indices,
            lemmas,
        }
    }

    pub fn is_content(&self, index: usize) -> bool {
        self.content_indices.binary_search(&index).is_ok()
    }

    /// Surfaces of the tokens in `span`, space-joined.
    pub fn surface_of(&self, span: Span) -> String {
        join_surfaces(&self.tokens[span.start..span.end])
    }
}

pub(crate) fn join_surfaces(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&t.surface);
    }
    out
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}')
}

/// Rewrites dotted `a.m.` / `p.m.` as `am` / `pm` so the letters survive
/// punctuation stripping as one word.
fn collapse_dotted_meridiem(chars: &[char]) -> Vec<char> {
    let mut out = Vec::with_capacity(chars.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let word_start = i == 0 || !chars[i - 1].is_alphanumeric();
        if word_start
            && matches!(c.to_ascii_lowercase(), 'a' | 'p')
            && chars.get(i + 1) == Some(&'.')
            && chars.get(i + 2).map(|m| m.to_ascii_lowercase()) == Some('m')
            && chars.get(i + 3).is_none_or(|n| !n.is_alphanumeric())
        {
            out.push(c);
            out.push(chars[i + 2]);
            i += 3;
            if chars.get(i) == Some(&'.') {
                i += 1;
            }
            continue;
        }
        out.push(c);
        i += 1;
    }
    out
}

/// Strips punctuation and symbols, keeping apostrophes, colons between
/// digits (`18:00`) and slashes between digits (`1/8`). Whitespace runs
/// collapse to one space. Case is preserved.
pub fn clean_text(raw: &str) -> String {
    let chars: Vec<char> = raw.chars().collect();
    let chars = collapse_dotted_meridiem(&chars);
    let mut kept = String::with_capacity(raw.len());
    for (i, &c) in chars.iter().enumerate() {
        let between_digits =
            || i > 0 && chars[i - 1].is_ascii_digit() && chars.get(i + 1).is_some_and(char::is_ascii_digit);
        let keep = c.is_alphanumeric() || is_apostrophe(c) || ((c == ':' || c == '/') && between_digits());
        if keep {
            kept.push(c);
        } else {
            kept.push(' ');
        }
    }
    let mut out = String::with_capacity(kept.len());
    for word in kept.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// A period that ends an abbreviation rather than a sentence: one after a
/// lone letter (`p.m.`, `J. Smith`) or after `am`/`pm` that follows digits.
fn is_abbreviation_period(chars: &[char], pos: usize) -> bool {
    let letter_at = |i: usize| chars.get(i).is_some_and(|c| c.is_alphabetic());
    if pos == 0 || !letter_at(pos - 1) {
        return false;
    }
    if pos == 1 || !letter_at(pos - 2) {
        return true;
    }
    if pos >= 3 {
        let a = chars[pos - 2].to_ascii_lowercase();
        let m = chars[pos - 1].to_ascii_lowercase();
        if matches!(a, 'a' | 'p') && m == 'm' && (pos == 3 || !letter_at(pos - 3)) {
            let mut j = pos - 3;
            if chars[j] == ' ' && j > 0 {
                j -= 1;
            }
            return chars[j].is_ascii_digit();
        }
    }
    false
}

/// Splits raw text on `.`, `!`, `?` and newlines, then cleans each piece.
/// Empty pieces are dropped.
pub fn segment_sentences(raw: &str) -> Vec<String> {
    let chars: Vec<char> = raw.chars().collect();
    let mut sentences = Vec::new();
    let mut current = String::new();
    let mut flush = |buf: &mut String| {
        let cleaned = clean_text(buf);
        if !cleaned.is_empty() {
            sentences.push(cleaned);
        }
        buf.clear();
    };
    for (i, &c) in chars.iter().enumerate() {
        let terminates = match c {
            '!' | '?' | '\n' => true,
            '.' => !is_abbreviation_period(&chars, i),
            _ => false,
        };
        if terminates {
            flush(&mut current);
        } else {
            current.push(c);
        }
    }
    flush(&mut current);
    sentences
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Letter,
    Digit,
    Other,
}

fn classify_char(c: char) -> CharClass {
    if c.is_numeric() {
        CharClass::Digit
    } else if c.is_alphabetic() {
        CharClass::Letter
    } else {
        CharClass::Other
    }
}

/// Splits a cleaned sentence into runs of letters or runs of digits.
pub fn tokenize(sentence: &str, sentence_index: usize) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize, CharClass)> = None;
    let mut emit = |from_char: usize, from_byte: usize, to_char: usize, to_byte: usize| {
        let raw = &sentence[from_byte..to_byte];
        tokens.push(Token {
            surface: raw.to_lowercase(),
            raw_surface: raw.to_string(),
            char_span: Span::new(from_char, to_char),
            sentence_index,
        });
    };
    let mut char_count = 0;
    for (ci, (bi, c)) in sentence.char_indices().enumerate() {
        let class = classify_char(c);
        if let Some((sc, sb, sclass)) = start {
            if class != sclass {
                emit(sc, sb, ci, bi);
                start = None;
            }
        }
        if start.is_none() && class != CharClass::Other {
            start = Some((ci, bi, class));
        }
        char_count = ci + 1;
    }
    if let Some((sc, sb, _)) = start {
        emit(sc, sb, char_count, sentence.len());
    }
    tokens
}

/// Indices of tokens whose surface is not a stopword. The token list
/// itself is left untouched for the temporal scanner.
pub fn remove_stopwords(tokens: &[Token], lexicon: &Lexicon) -> Vec<usize> {
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| !lexicon.is_stopword(&t.surface))
        .map(|(i, _)| i)
        .collect()
}

const MAX_LEMMA_STEPS: usize = 8;

/// Dictionary lookup, then suffix rules, repeated until the form is stable.
pub fn lemmatize(surface: &str, lexicon: &Lexicon) -> String {
    let mut current = surface.to_string();
    for _ in 0..MAX_LEMMA_STEPS {
        let next = lemma_step(&current, lexicon);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn is_consonant(c: char) -> bool {
    c.is_ascii_alphabetic() && !is_vowel(c)
}

fn lemma_step(word: &str, lexicon: &Lexicon) -> String {
    if let Some(lemma) = lexicon.irregular(word) {
        return lemma.to_string();
    }
    if !word.chars().all(char::is_alphabetic) || word.chars().count() <= 3 {
        return word.to_string();
    }
    let n = word.chars().count();
    if let Some(stem) = word.strip_suffix("ies") {
        if n > 4 {
            return alloc::format!("{stem}y");
        }
    }
    if let Some(stem) = word.strip_suffix("es") {
        if ["s", "x", "z", "ch", "sh"].iter().any(|s| stem.ends_with(s)) {
            return stem.to_string();
        }
    }
    if word.ends_with('s') && !["ss", "us", "is"].iter().any(|s| word.ends_with(s)) {
        return word[..word.len() - 1].to_string();
    }
    if let Some(stem) = word.strip_suffix("ing") {
        if viable_stem(stem) {
            return restore_stem(stem);
        }
    }
    if let Some(stem) = word.strip_suffix("ed") {
        if !word.ends_with("eed") && viable_stem(stem) {
            return restore_stem(stem);
        }
    }
    word.to_string()
}

fn viable_stem(stem: &str) -> bool {
    stem.chars().count() >= 2 && stem.chars().any(is_vowel)
}

/// Undoes consonant doubling (`running` -> `run`) or restores a silent e
/// after consonant-vowel-consonant (`inviting` -> `invite`).
fn restore_stem(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    if n >= 2 {
        let (a, b) = (chars[n - 2], chars[n - 1]);
        if a == b && is_consonant(b) && !matches!(b, 'l' | 's' | 'z' | 'f') {
            return chars[..n - 1].iter().collect();
        }
    }
    if n >= 3 {
        let (c1, v, c2) = (chars[n - 3], chars[n - 2], chars[n - 1]);
        if is_consonant(c1) && is_vowel(v) && v != 'y' && is_consonant(c2) && !matches!(c2, 'w' | 'x' | 'y') {
            return alloc::format!("{stem}e");
        }
    }
    stem.to_string()
}
