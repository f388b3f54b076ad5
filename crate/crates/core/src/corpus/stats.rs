use std::collections::HashSet;

use super::{Label, LabeledReview};

const SENTENCE_DELIMITERS: [char; 4] = ['।', '?', '!', '.'];

/// Per-class corpus summary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassStats {
    pub documents: usize,
    pub words: usize,
    pub unique_words: usize,
    pub sentences: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub positive: ClassStats,
    pub negative: ClassStats,
}

impl CorpusStats {
    pub fn class(&self, label: Label) -> &ClassStats {
        match label {
            Label::Positive => &self.positive,
            Label::Negative => &self.negative,
        }
    }
}

fn count_sentences(text: &str) -> usize {
    text.split(SENTENCE_DELIMITERS.as_slice())
        .filter(|segment| segment.split_whitespace().next().is_some())
        .count()
}

pub fn compute_stats(corpus: &[LabeledReview]) -> CorpusStats {
    let mut stats = CorpusStats::default();
    for label in [Label::Positive, Label::Negative] {
        let mut unique: HashSet<&str> = HashSet::new();
        let mut class = ClassStats::default();
        for review in corpus.iter().filter(|r| r.label == label) {
            class.documents += 1;
            for token in review.text.split_whitespace() {
                class.words += 1;
                unique.insert(token);
            }
            class.sentences += count_sentences(&review.text);
        }
        class.unique_words = unique.len();
        match label {
            Label::Positive => stats.positive = class,
            Label::Negative => stats.negative = class,
        }
    }
    stats
}
