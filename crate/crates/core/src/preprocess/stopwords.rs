//! English stop-word list (318 entries), one word per line in `assets/stopwords_en.txt`.

use std::collections::HashSet;
use std::sync::OnceLock;

const BUILTIN: &str = include_str!("../../assets/stopwords_en.txt");

#[derive(Debug, Clone, Default)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    pub fn parse(src: &str) -> Self {
        StopWords(
            src.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect(),
        )
    }

    pub fn builtin() -> &'static StopWords {
        static LIST: OnceLock<StopWords> = OnceLock::new();
        LIST.get_or_init(|| StopWords::parse(BUILTIN))
    }

    pub fn empty() -> Self {
        StopWords::default()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_list() {
        let sw = StopWords::builtin();
        assert_eq!(sw.len(), 318);
        for w in ["the", "a", "i", "and", "other"] {
            assert!(sw.contains(w), "{w}");
        }
        assert!(!sw.contains("covid"));
        assert!(!sw.contains("currently"));
    }

    #[test]
    fn asset_is_sorted_and_lf() {
        assert!(!BUILTIN.contains('\r'));
        let words: Vec<&str> = BUILTIN.lines().collect();
        let mut sorted = words.clone();
        sorted.sort_unstable();
        assert_eq!(words, sorted);
    }
}
