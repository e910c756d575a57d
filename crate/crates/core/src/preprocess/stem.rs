//! Porter (1980) suffix-stripping stemmer.
//!
//! Steps 1 and 5 are coded directly; the suffix tables of steps 2 to 4 come from
//! `assets/porter_rules.tsv`. Words that are not pure ASCII lowercase alphanumerics,
//! or are two characters or shorter, are returned unchanged.

use std::sync::OnceLock;

const RULES: &str = include_str!("../../assets/porter_rules.tsv");

#[derive(Debug, Clone)]
struct Rule {
    suffix: &'static str,
    replacement: &'static str,
    min_measure: usize,
    /// Required final letter of the stem (the `(*S or *T)ion` case).
    stem_ends: Option<&'static str>,
}

#[derive(Debug)]
struct RuleTable {
    steps: [Vec<Rule>; 3],
}

fn rules() -> &'static RuleTable {
    static TABLE: OnceLock<RuleTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut steps: [Vec<Rule>; 3] = Default::default();
        for line in RULES.lines() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&'static str> = line.split('\t').collect();
            assert_eq!(f.len(), 4, "malformed stemmer rule {line:?}");
            let step: usize = f[0].parse().expect("rule step");
            let mut cond = f[3].split(',');
            let min_measure = cond
                .next()
                .and_then(|m| m.strip_prefix("m>"))
                .and_then(|m| m.parse::<usize>().ok())
                .expect("rule measure condition")
                + 1;
            let stem_ends = cond.next();
            steps[step - 2].push(Rule {
                suffix: f[1],
                replacement: f[2],
                min_measure,
                stem_ends,
            });
        }
        RuleTable { steps }
    })
}

/// Stems one lowercase word.
pub fn stem(word: &str) -> String {
    if word.len() <= 2 || !word.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()) {
        return word.to_string();
    }
    let mut w = Word(word.as_bytes().to_vec());
    w.step1a();
    w.step1b();
    w.step1c();
    for step in &rules().steps {
        w.apply_table(step);
    }
    w.step5a();
    w.step5b();
    String::from_utf8(w.0).expect("ascii in, ascii out")
}

struct Word(Vec<u8>);

impl Word {
    fn is_consonant(&self, i: usize) -> bool {
        match self.0[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.is_consonant(i - 1),
            _ => true,
        }
    }

    /// Number of VC sequences in `self.0[..len]`.
    fn measure(&self, len: usize) -> usize {
        let mut m = 0;
        let mut i = 0;
        while i < len && self.is_consonant(i) {
            i += 1;
        }
        loop {
            while i < len && !self.is_consonant(i) {
                i += 1;
            }
            if i >= len {
                return m;
            }
            while i < len && self.is_consonant(i) {
                i += 1;
            }
            m += 1;
        }
    }

    fn has_vowel(&self, len: usize) -> bool {
        (0..len).any(|i| !self.is_consonant(i))
    }

    fn ends_double_consonant(&self, len: usize) -> bool {
        len >= 2 && self.0[len - 1] == self.0[len - 2] && self.is_consonant(len - 1)
    }

    /// consonant-vowel-consonant ending at `len - 1`, last letter not w, x or y.
    fn ends_cvc(&self, len: usize) -> bool {
        len >= 3
            && self.is_consonant(len - 3)
            && !self.is_consonant(len - 2)
            && self.is_consonant(len - 1)
            && !matches!(self.0[len - 1], b'w' | b'x' | b'y')
    }

    fn ends_with(&self, suffix: &str) -> bool {
        self.0.ends_with(suffix.as_bytes())
    }

    fn replace_suffix(&mut self, suffix_len: usize, replacement: &str) {
        let keep = self.0.len() - suffix_len;
        self.0.truncate(keep);
        self.0.extend_from_slice(replacement.as_bytes());
    }

    fn step1a(&mut self) {
        if self.ends_with("sses") {
            self.replace_suffix(4, "ss");
        } else if self.ends_with("ies") {
            self.replace_suffix(3, "i");
        } else if self.ends_with("ss") {
        } else if self.ends_with("s") {
            self.replace_suffix(1, "");
        }
    }

    fn step1b(&mut self) {
        let n = self.0.len();
        if self.ends_with("eed") {
            if self.measure(n - 3) > 0 {
                self.replace_suffix(3, "ee");
            }
            return;
        }
        let cut = if self.ends_with("ed") && self.has_vowel(n - 2) {
            2
        } else if self.ends_with("ing") && self.has_vowel(n - 3) {
            3
        } else {
            return;
        };
        self.replace_suffix(cut, "");
        let n = self.0.len();
        if self.ends_with("at") || self.ends_with("bl") || self.ends_with("iz") {
            self.0.push(b'e');
        } else if self.ends_double_consonant(n) && !matches!(self.0[n - 1], b'l' | b's' | b'z') {
            self.0.pop();
        } else if self.measure(n) == 1 && self.ends_cvc(n) {
            self.0.push(b'e');
        }
    }

    fn step1c(&mut self) {
        let n = self.0.len();
        if self.ends_with("y") && self.has_vowel(n - 1) {
            self.0[n - 1] = b'i';
        }
    }

    fn apply_table(&mut self, rules: &[Rule]) {
        let Some(rule) = rules.iter().find(|r| self.ends_with(r.suffix)) else {
            return;
        };
        let stem_len = self.0.len() - rule.suffix.len();
        if let Some(ends) = rule.stem_ends {
            let ok = stem_len > 0 && ends.split('|').any(|e| e.as_bytes() == [self.0[stem_len - 1]]);
            if !ok {
                return;
            }
        }
        if self.measure(stem_len) >= rule.min_measure {
            self.replace_suffix(rule.suffix.len(), rule.replacement);
        }
    }

    fn step5a(&mut self) {
        let n = self.0.len();
        if !self.ends_with("e") {
            return;
        }
        let m = self.measure(n - 1);
        if m > 1 || (m == 1 && !self.ends_cvc(n - 1)) {
            self.0.pop();
        }
    }

    fn step5b(&mut self) {
        let n = self.0.len();
        if self.measure(n) > 1 && self.ends_double_consonant(n) && self.0[n - 1] == b'l' {
            self.0.pop();
        }
    }
}
