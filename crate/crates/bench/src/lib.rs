//! Synthetic inputs for the benchmarks.

use infodemic::corpus::{Corpus, Label, Post, Source};
use infodemic::ensemble::{PredictionRecord, PredictionSet};
use infodemic::rng::SeededRng;

const WORDS: &[&str] = &[
    "covid", "cases", "vaccine", "cure", "hoax", "reported", "ministry", "testing", "deaths", "miracle",
    "garlic", "5g", "lockdown", "hospital", "masks", "india", "states", "update", "shocking", "truth",
];

/// Tweet-like labeled posts with URLs, mentions, hashtags and emoji sprinkled in.
pub fn tweets(n: usize, seed: u64) -> Corpus {
    let mut rng = SeededRng::new(seed);
    let posts = (0..n)
        .map(|i| {
            let len = 8 + rng.below(20) as usize;
            let mut words: Vec<String> = (0..len)
                .map(|_| WORDS[rng.below(WORDS.len() as u64) as usize].to_string())
                .collect();
            words.push(format!("https://t.co/{}", rng.below(1 << 30)));
            words.insert(0, "@WHO".into());
            words.push("#COVID19".into());
            words.push("\u{1F637}\u{2764}\u{FE0F}".into());
            Post {
                id: i.to_string(),
                text: words.join(" "),
                label: Some(if rng.below(2) == 0 { Label::Fake } else { Label::Real }),
                source: Source::Task,
            }
        })
        .collect();
    Corpus::new("bench", posts).expect("ids are unique")
}

/// `members` prediction sets over the same `n` ids.
pub fn prediction_sets(n: usize, members: usize, seed: u64) -> Vec<PredictionSet> {
    let mut rng = SeededRng::new(seed);
    (0..members)
        .map(|m| {
            let records = (0..n).map(|i| PredictionRecord {
                id: i.to_string(),
                label: if rng.below(2) == 0 { Label::Fake } else { Label::Real },
                score: Some(rng.below(1001) as f64 / 1000.0),
            });
            PredictionSet::from_records(format!("m{m}"), records).expect("ids are unique")
        })
        .collect()
}
