//! Tweet-aware text normalization.
//!
//! [`apply_pipeline`] rewrites URL, mention, hashtag and emoji spans according to a
//! [`PreprocessConfig`], then optionally lowercases and normalizes whitespace.
//! [`normalize_baseline`] produces the stemmed, stop-word-free tokens used by the
//! bag-of-words model.

pub mod emoji;
pub mod segment;
pub mod stem;
pub mod stopwords;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use emoji::EmojiTable;
pub use segment::{segment, Span};
pub use stopwords::StopWords;

pub const URL_TOKEN: &str = "$URL$";
pub const MENTION_TOKEN: &str = "$MENTION$";
pub const HASHTAG_TOKEN: &str = "$HASHTAG$";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpanKind {
    Url,
    Mention,
    Hashtag,
    Emoji,
    Text,
}

/// What to do with URL, mention and hashtag spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanMode {
    #[default]
    Keep,
    Remove,
    Tokenize,
    /// Hashtags only: drop the `#`.
    Unwrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmojiMode {
    #[default]
    Keep,
    Remove,
    Describe,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unwrap is only valid for hashtags, not for {0}")]
pub struct ConfigError(pub &'static str);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub url: SpanMode,
    pub mention: SpanMode,
    pub hashtag: SpanMode,
    pub emoji: EmojiMode,
    pub lowercase: bool,
}

impl PreprocessConfig {
    /// The configuration used by the best transformer runs: tokenize URLs, describe
    /// emoji, lowercase.
    pub fn best() -> Self {
        Self {
            url: SpanMode::Tokenize,
            emoji: EmojiMode::Describe,
            lowercase: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.url == SpanMode::Unwrap {
            return Err(ConfigError("urls"));
        }
        if self.mention == SpanMode::Unwrap {
            return Err(ConfigError("mentions"));
        }
        Ok(())
    }

    /// Short human description in the style of an ablation table row, e.g.
    /// `tokenizing URLs + converting emoji to words + lowercase`.
    pub fn describe(&self) -> String {
        let mut removing = Vec::new();
        let mut tokenizing = Vec::new();
        for (mode, name) in [
            (self.hashtag, "hashtags"),
            (self.url, "URLs"),
            (self.mention, "mentions"),
        ] {
            match mode {
                SpanMode::Remove => removing.push(name),
                SpanMode::Tokenize => tokenizing.push(name),
                _ => {}
            }
        }
        if self.emoji == EmojiMode::Remove {
            removing.push("emoji");
        }
        let mut parts = Vec::new();
        if !removing.is_empty() {
            parts.push(format!("removing {}", join_items(&removing)));
        }
        if !tokenizing.is_empty() {
            parts.push(format!("tokenizing {}", join_items(&tokenizing)));
        }
        if self.hashtag == SpanMode::Unwrap {
            parts.push("converting hashtags to words".to_string());
        }
        if self.emoji == EmojiMode::Describe {
            parts.push("converting emoji to words".to_string());
        }
        if self.lowercase {
            parts.push("lowercase".to_string());
        }
        if parts.is_empty() {
            "none".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

fn join_items(items: &[&str]) -> String {
    match items {
        [one] => one.to_string(),
        [a, b] => format!("{a} and {b}"),
        _ => items.join(", "),
    }
}

impl fmt::Display for PreprocessConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Rewrites `text` span by span. Removal deletes the span; the whitespace pass then
/// collapses the gap it leaves.
pub fn apply_pipeline(text: &str, config: &PreprocessConfig) -> String {
    apply_pipeline_with(text, config, EmojiTable::builtin())
}

pub fn apply_pipeline_with(text: &str, config: &PreprocessConfig, table: &EmojiTable) -> String {
    let mut out = String::with_capacity(text.len());
    for span in segment::segment_with(text, table) {
        match span.kind {
            SpanKind::Text => out.push_str(span.text),
            SpanKind::Url => rewrite(&mut out, span.text, config.url, URL_TOKEN),
            SpanKind::Mention => rewrite(&mut out, span.text, config.mention, MENTION_TOKEN),
            SpanKind::Hashtag => rewrite(&mut out, span.text, config.hashtag, HASHTAG_TOKEN),
            SpanKind::Emoji => match config.emoji {
                EmojiMode::Keep => out.push_str(span.text),
                EmojiMode::Remove => {}
                EmojiMode::Describe => out.push_str(&table.describe(span.text)),
            },
        }
    }
    if config.lowercase {
        out = out.to_lowercase();
    }
    collapse_whitespace(&out)
}

fn rewrite(out: &mut String, span: &str, mode: SpanMode, token: &str) {
    match mode {
        SpanMode::Keep => out.push_str(span),
        SpanMode::Remove => {}
        SpanMode::Tokenize => out.push_str(token),
        SpanMode::Unwrap => out.push_str(span.strip_prefix('#').unwrap_or(span)),
    }
}

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Lowercase stemmed tokens for the bag-of-words model.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenList(pub Vec<String>);

impl TokenList {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }
}

impl<S: Into<String>> FromIterator<S> for TokenList {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenList(iter.into_iter().map(Into::into).collect())
    }
}

/// Lowercases, keeps runs of two or more alphanumeric characters, drops stop-words,
/// stems. Stems that land on a stop-word or shrink below two characters are dropped.
pub fn normalize_baseline(text: &str, stopwords: &StopWords) -> TokenList {
    let lower = text.to_lowercase();
    lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| w.chars().nth(1).is_some())
        .filter(|w| !stopwords.contains(w))
        .map(stem::stem)
        .filter(|s| s.chars().nth(1).is_some() && !stopwords.contains(s))
        .collect()
}
