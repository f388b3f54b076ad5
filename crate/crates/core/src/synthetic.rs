//! Generators for label-separable review corpora: each review carries
//! sentiment words from exactly one class mixed with neutral filler words.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::io::CorpusRecord;
use crate::corpus::{Label, LabeledReview};

pub const POSITIVE_WORDS: [&str; 6] = ["ভালো", "সুস্বাদু", "চমৎকার", "দারুণ", "মজাদার", "অসাধারণ"];
pub const NEGATIVE_WORDS: [&str; 6] = ["খারাপ", "বাজে", "পচা", "জঘন্য", "বিরক্তিকর", "ঠান্ডা"];
pub const FILLER_WORDS: [&str; 12] = [
    "খাবার", "রেস্তোরাঁ", "পরিবেশ", "দাম", "সেবা", "আমরা", "গিয়েছিলাম", "এখানে", "বিরিয়ানি", "চা", "আজ", "সবাই",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub reviews: usize,
    pub seed: u64,
    /// Filler words per review, inclusive range.
    pub filler: (usize, usize),
    /// Sentiment words per review, inclusive range.
    pub sentiment: (usize, usize),
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            reviews: 40,
            seed: 0,
            filler: (2, 6),
            sentiment: (1, 3),
        }
    }
}

/// Balanced, distinct reviews; even positions are positive.
pub fn separable_corpus(spec: &SyntheticSpec) -> Vec<LabeledReview> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(spec.reviews);
    while out.len() < spec.reviews {
        let label = Label::from_bool(out.len() % 2 == 0);
        let words = match label {
            Label::Positive => &POSITIVE_WORDS,
            Label::Negative => &NEGATIVE_WORDS,
        };
        let n_fill = rng.gen_range(spec.filler.0..=spec.filler.1);
        let n_sent = rng.gen_range(spec.sentiment.0..=spec.sentiment.1);
        let mut tokens: Vec<&str> = Vec::with_capacity(n_fill + n_sent);
        for _ in 0..n_fill {
            tokens.push(FILLER_WORDS.choose(&mut rng).unwrap());
        }
        for _ in 0..n_sent {
            tokens.push(words.choose(&mut rng).unwrap());
        }
        tokens.shuffle(&mut rng);
        if tokens.len() < 3 {
            continue;
        }
        let text = tokens.join(" ");
        if seen.insert(text.clone()) {
            out.push(LabeledReview::new(format!("syn{:05}", out.len()), text, label));
        }
    }
    out
}

/// A raw corpus file's records built from [`separable_corpus`], with
/// punctuation, digits and emoji sprinkled in, plus a few duplicates, short
/// reviews and English-mixed reviews that cleaning should reject.
pub fn noisy_records(spec: &SyntheticSpec) -> Vec<CorpusRecord> {
    let clean = separable_corpus(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed);
    let noise = ["।", "!", ",", "১০০", "😀", "👍", "?", "২"];
    let mut out: Vec<CorpusRecord> = clean
        .iter()
        .map(|r| {
            let mut text = String::new();
            for tok in r.text.split(' ') {
                text.push_str(tok);
                if rng.gen_bool(0.3) {
                    text.push_str(noise.choose(&mut rng).unwrap());
                }
                text.push(' ');
            }
            CorpusRecord {
                id: r.id.clone(),
                label: Some(r.label),
                text: text.trim_end().to_string(),
            }
        })
        .collect();
    let extra = (clean.len() / 10).max(1);
    for k in 0..extra {
        let src = &clean[k % clean.len()];
        out.push(CorpusRecord {
            id: format!("dup{k:04}"),
            label: Some(src.label),
            text: format!("{}!", src.text),
        });
        out.push(CorpusRecord {
            id: format!("short{k:04}"),
            label: Some(Label::Positive),
            text: "ভালো খাবার 😀".to_string(),
        });
        out.push(CorpusRecord {
            id: format!("mixed{k:04}"),
            label: Some(Label::Negative),
            text: format!("{} was not good", src.text),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Label implied by counting class words.
    fn token_vote(text: &str) -> Label {
        let pos = text.split(' ').filter(|t| POSITIVE_WORDS.contains(t)).count();
        let neg = text.split(' ').filter(|t| NEGATIVE_WORDS.contains(t)).count();
        assert!(pos == 0 || neg == 0);
        Label::from_bool(pos > neg)
    }

    #[test]
    fn separable_and_balanced() {
        let c = separable_corpus(&SyntheticSpec::default());
        assert_eq!(c.len(), 40);
        assert_eq!(c.iter().filter(|r| r.label == Label::Positive).count(), 20);
        for r in &c {
            assert_eq!(token_vote(&r.text), r.label);
            assert!(r.token_count >= 3);
        }
        assert_eq!(c, separable_corpus(&SyntheticSpec::default()));
    }
}
