//! Emoji codepoint-sequence to shortcode table.
//!
//! The built-in table is `assets/emoji_en.tsv`: one sequence per line, codepoints as
//! space-separated hex, a tab, then the shortcode without colons. Lines starting with
//! `#` are comments.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use thiserror::Error;

const BUILTIN: &str = include_str!("../../assets/emoji_en.tsv");

/// Shortcode used in describe mode for pictographs missing from the table.
pub const UNKNOWN_SHORTCODE: &str = "emoji";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EmojiTableError {
    #[error("line {line}: expected `codepoints<TAB>shortcode`")]
    Shape { line: usize },
    #[error("line {line}: bad codepoint {value:?}")]
    Codepoint { line: usize, value: String },
}

#[derive(Debug, Clone)]
pub struct EmojiTable {
    sequences: HashMap<String, String>,
    members: HashSet<char>,
    longest: usize,
}

impl EmojiTable {
    pub fn parse(src: &str) -> Result<Self, EmojiTableError> {
        let mut sequences = HashMap::new();
        let mut members = HashSet::new();
        let mut longest = 0;
        for (i, line) in src.lines().enumerate() {
            let line_no = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (cps, code) = line
                .split_once('\t')
                .filter(|(c, s)| !c.is_empty() && !s.is_empty())
                .ok_or(EmojiTableError::Shape { line: line_no })?;
            let mut seq = String::new();
            for hex in cps.split(' ') {
                let ch = u32::from_str_radix(hex, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| EmojiTableError::Codepoint {
                        line: line_no,
                        value: hex.to_string(),
                    })?;
                seq.push(ch);
            }
            longest = longest.max(seq.chars().count());
            members.extend(seq.chars().filter(|c| !c.is_ascii()));
            sequences.insert(seq, code.to_string());
        }
        Ok(Self {
            sequences,
            members,
            longest,
        })
    }

    pub fn builtin() -> &'static EmojiTable {
        static TABLE: OnceLock<EmojiTable> = OnceLock::new();
        TABLE.get_or_init(|| EmojiTable::parse(BUILTIN).expect("built-in emoji table is well formed"))
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn shortcode(&self, seq: &str) -> Option<&str> {
        self.sequences.get(seq).map(String::as_str)
    }

    /// True for codepoints that can be part of an emoji span.
    pub fn is_emoji_char(&self, c: char) -> bool {
        !c.is_ascii() && (self.members.contains(&c) || is_pictographic(c))
    }

    /// Rewrites an emoji run as concatenated `:shortcode:` items using greedy longest
    /// matches. Unknown pictographs become `:emoji:`; stray joiners and modifiers vanish.
    pub fn describe(&self, run: &str) -> String {
        let chars: Vec<(usize, char)> = run.char_indices().collect();
        let mut out = String::new();
        let mut i = 0;
        while i < chars.len() {
            let start = chars[i].0;
            let max_len = self.longest.min(chars.len() - i);
            let hit = (1..=max_len).rev().find_map(|len| {
                let end = chars.get(i + len).map_or(run.len(), |&(b, _)| b);
                self.shortcode(&run[start..end]).map(|code| (len, code))
            });
            match hit {
                Some((len, code)) => {
                    out.push(':');
                    out.push_str(code);
                    out.push(':');
                    i += len;
                }
                None => {
                    if is_pictographic(chars[i].1) {
                        out.push(':');
                        out.push_str(UNKNOWN_SHORTCODE);
                        out.push(':');
                    }
                    i += 1;
                }
            }
        }
        out
    }
}

/// Coarse pictographic blocks, used for emoji the table does not know yet.
fn is_pictographic(c: char) -> bool {
    matches!(c as u32, 0x1F000..=0x1FAFF | 0x2600..=0x27BF | 0x2B00..=0x2BFF)
}
