//! Review corpus construction: cleaning, label merging, agreement,
//! descriptive statistics and deterministic splitting.

mod agreement;
mod filter;
pub mod io;
mod split;
mod stats;

use std::fmt;
use std::str::FromStr;

pub use agreement::{average_pairwise_kappa, cohens_kappa, merge_annotations};
pub use filter::{filter_reviews, is_stripped_char, normalize_text, RejectReason, Rejection};
pub use split::{split_corpus, SplitSpec, Splits};
pub use stats::{compute_stats, ClassStats, CorpusStats};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CorpusError {
    #[error("annotation list is empty")]
    EmptyAnnotations,
    #[error("even number of annotators ({0}); majority may tie")]
    EvenAnnotatorCount(usize),
    #[error("label lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("need at least two annotators, got {0}")]
    TooFewAnnotators(usize),
    #[error("invalid split ratios: {0}")]
    RatiosInvalid(String),
    #[error("corpus of {0} reviews is too small for the requested split")]
    CorpusTooSmall(usize),
}

/// Binary sentiment class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "pos",
            Label::Negative => "neg",
        }
    }

    /// 1.0 for positive, 0.0 for negative.
    pub fn target(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => 0.0,
        }
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pos" => Ok(Label::Positive),
            "neg" => Ok(Label::Negative),
            other => Err(format!("unknown label `{other}` (expected pos or neg)")),
        }
    }
}

/// Where a review was collected from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Source {
    Page,
    Group,
    Comment,
    #[default]
    External,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawReview {
    pub id: String,
    pub text: String,
    pub source: Source,
    pub annotations: Vec<Label>,
}

impl RawReview {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        RawReview {
            id: id.into(),
            text: text.into(),
            source: Source::default(),
            annotations: Vec::new(),
        }
    }

    pub fn with_annotations(mut self, annotations: Vec<Label>) -> Self {
        self.annotations = annotations;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledReview {
    pub id: String,
    pub text: String,
    pub label: Label,
    pub token_count: usize,
}

impl LabeledReview {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Label) -> Self {
        let text = text.into();
        let token_count = text.split_whitespace().count();
        LabeledReview {
            id: id.into(),
            text,
            label,
            token_count,
        }
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.text.split_whitespace().collect()
    }
}
