//! Lossless segmentation of post text into URL, mention, hashtag, emoji and plain spans.
//!
//! Grammar:
//! - URL: `http://` or `https://` plus the maximal non-whitespace run, minus trailing
//!   `.,;:!?`; at least one character must follow the scheme.
//! - Mention: `@` plus 1 to 15 of `[A-Za-z0-9_]`, not preceded by a word character,
//!   `@` or `#`, and not followed by another username character.
//! - Hashtag: `#` plus a maximal run of Unicode letters, digits or `_`, not preceded by a
//!   word character, `@`, `#` or `&`.
//! - Emoji: maximal run of codepoints that occur in the emoji table or in the
//!   pictographic blocks.

use super::emoji::EmojiTable;
use super::SpanKind;

const URL_TRAILING: &[char] = &['.', ',', ';', ':', '!', '?'];
const MAX_MENTION: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span<'a> {
    pub kind: SpanKind,
    pub text: &'a str,
}

impl<'a> Span<'a> {
    fn new(kind: SpanKind, text: &'a str) -> Self {
        Self { kind, text }
    }
}

/// Splits `text` into spans whose concatenation is exactly `text`.
pub fn segment(text: &str) -> Vec<Span<'_>> {
    segment_with(text, EmojiTable::builtin())
}

pub fn segment_with<'a>(text: &'a str, table: &EmojiTable) -> Vec<Span<'a>> {
    let mut spans = Vec::new();
    let mut plain_start = 0;
    let mut pos = 0;
    let mut prev: Option<char> = None;

    while pos < text.len() {
        let rest = &text[pos..];
        let c = rest.chars().next().expect("pos is on a char boundary");
        let found = match c {
            'h' => match_url(rest).map(|n| (SpanKind::Url, n)),
            '@' if !blocks_mention(prev) => match_mention(rest).map(|n| (SpanKind::Mention, n)),
            '#' if !blocks_hashtag(prev) => match_hashtag(rest).map(|n| (SpanKind::Hashtag, n)),
            c if table.is_emoji_char(c) => Some((SpanKind::Emoji, match_emoji(rest, table))),
            _ => None,
        };
        match found {
            Some((kind, len)) => {
                if plain_start < pos {
                    spans.push(Span::new(SpanKind::Text, &text[plain_start..pos]));
                }
                let piece = &text[pos..pos + len];
                spans.push(Span::new(kind, piece));
                prev = piece.chars().next_back();
                pos += len;
                plain_start = pos;
            }
            None => {
                prev = Some(c);
                pos += c.len_utf8();
            }
        }
    }
    if plain_start < text.len() {
        spans.push(Span::new(SpanKind::Text, &text[plain_start..]));
    }
    spans
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_username_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn blocks_mention(prev: Option<char>) -> bool {
    prev.is_some_and(|p| is_word_char(p) || p == '@' || p == '#')
}

fn blocks_hashtag(prev: Option<char>) -> bool {
    prev.is_some_and(|p| is_word_char(p) || p == '@' || p == '#' || p == '&')
}

fn match_url(rest: &str) -> Option<usize> {
    let scheme = if rest.starts_with("https://") {
        "https://".len()
    } else if rest.starts_with("http://") {
        "http://".len()
    } else {
        return None;
    };
    let run = rest.find(char::is_whitespace).unwrap_or(rest.len());
    let trimmed = rest[..run].trim_end_matches(URL_TRAILING).len();
    (trimmed > scheme).then_some(trimmed)
}

fn match_mention(rest: &str) -> Option<usize> {
    let body = rest[1..]
        .find(|c: char| !is_username_char(c))
        .unwrap_or(rest.len() - 1);
    (1..=MAX_MENTION).contains(&body).then_some(body + 1)
}

fn match_hashtag(rest: &str) -> Option<usize> {
    let body = rest[1..]
        .find(|c: char| !is_word_char(c))
        .unwrap_or(rest.len() - 1);
    (body > 0).then_some(body + 1)
}

fn match_emoji(rest: &str, table: &EmojiTable) -> usize {
    rest.find(|c: char| !table.is_emoji_char(c))
        .unwrap_or(rest.len())
}
