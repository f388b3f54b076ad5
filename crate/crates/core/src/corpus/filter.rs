use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use unicode_general_category::{get_general_category, GeneralCategory as Gc};

use super::RawReview;

const ZWNJ: char = '\u{200C}';
const ZWJ: char = '\u{200D}';

/// Why a review was dropped during cleaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    Duplicate,
    TooShort,
    MixedLanguage,
    /// Marked neutral by an annotator at ingestion time.
    Neutral,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::Duplicate => "duplicate",
            RejectReason::TooShort => "too-short",
            RejectReason::MixedLanguage => "mixed-language",
            RejectReason::Neutral => "neutral",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RejectReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "duplicate" => Ok(RejectReason::Duplicate),
            "too-short" => Ok(RejectReason::TooShort),
            "mixed-language" => Ok(RejectReason::MixedLanguage),
            "neutral" => Ok(RejectReason::Neutral),
            other => Err(format!("unknown rejection reason `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub id: String,
    pub reason: RejectReason,
}

/// True for punctuation, digits and other numbers, symbols (which covers
/// emoji pictographs and skin-tone modifiers) and emoji presentation
/// selectors.
pub fn is_stripped_char(c: char) -> bool {
    match c {
        '\u{FE0E}' | '\u{FE0F}' | '\u{20E3}' | '\u{E0020}'..='\u{E007F}' => return true,
        _ => {}
    }
    matches!(
        get_general_category(c),
        Gc::ConnectorPunctuation
            | Gc::DashPunctuation
            | Gc::OpenPunctuation
            | Gc::ClosePunctuation
            | Gc::InitialPunctuation
            | Gc::FinalPunctuation
            | Gc::OtherPunctuation
            | Gc::DecimalNumber
            | Gc::LetterNumber
            | Gc::OtherNumber
            | Gc::MathSymbol
            | Gc::CurrencySymbol
            | Gc::ModifierSymbol
            | Gc::OtherSymbol
    )
}

fn is_latin_letter(c: char) -> bool {
    c.is_alphabetic()
        && matches!(c,
            'A'..='Z'
            | 'a'..='z'
            | '\u{00C0}'..='\u{024F}'
            | '\u{1E00}'..='\u{1EFF}'
            | '\u{2C60}'..='\u{2C7F}'
            | '\u{A720}'..='\u{A7FF}'
            | '\u{FF21}'..='\u{FF3A}'
            | '\u{FF41}'..='\u{FF5A}')
}

/// Strips punctuation, numbers and emoji (each replaced by a space), drops
/// control characters, trims joiners left dangling at token edges and
/// collapses whitespace runs to single spaces.
pub fn normalize_text(text: &str) -> String {
    let mapped: String = text
        .chars()
        .map(|c| {
            if is_stripped_char(c) || c.is_control() {
                ' '
            } else {
                c
            }
        })
        .collect();
    let mut out = String::with_capacity(mapped.len());
    for token in mapped.split_whitespace() {
        let token = token.trim_matches(|c| c == ZWJ || c == ZWNJ);
        if token.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

/// Cleans a raw review collection.
///
/// Kept reviews carry their normalized text. Each rejected review gets the
/// first matching reason in the order duplicate, too-short, mixed-language.
/// Duplicates are judged on normalized text against every earlier review,
/// kept or not.
pub fn filter_reviews(raw: &[RawReview], min_words: usize) -> (Vec<RawReview>, Vec<Rejection>) {
    let min_words = min_words.max(1);
    let mut seen: HashSet<String> = HashSet::new();
    let mut kept = Vec::new();
    let mut rejections = Vec::new();

    for review in raw {
        let normalized = normalize_text(&review.text);
        let reason = if !seen.insert(normalized.clone()) {
            Some(RejectReason::Duplicate)
        } else if normalized.split(' ').filter(|t| !t.is_empty()).count() < min_words {
            Some(RejectReason::TooShort)
        } else if normalized.chars().any(is_latin_letter) {
            Some(RejectReason::MixedLanguage)
        } else {
            None
        };
        match reason {
            Some(reason) => rejections.push(Rejection {
                id: review.id.clone(),
                reason,
            }),
            None => kept.push(RawReview {
                text: normalized,
                ..review.clone()
            }),
        }
    }
    (kept, rejections)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(id: &str, text: &str) -> RawReview {
        RawReview::new(id, text)
    }

    #[test]
    fn identical_reviews_keep_first() {
        let input = vec![raw("a", "খাবার খুব ভালো ছিল"), raw("b", "খাবার খুব ভালো ছিল")];
        let (kept, rej) = filter_reviews(&input, 3);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "a");
        assert_eq!(
            rej,
            vec![Rejection {
                id: "b".into(),
                reason: RejectReason::Duplicate
            }]
        );
    }

    #[test]
    fn duplicates_detected_after_normalization() {
        let input = vec![raw("a", "খাবার  খুব ভালো!"), raw("b", " খাবার খুব ভালো ১০০ 😀")];
        let (kept, rej) = filter_reviews(&input, 3);
        assert_eq!(kept.len(), 1);
        assert_eq!(rej[0].reason, RejectReason::Duplicate);
    }

    #[test]
    fn two_tokens_too_short() {
        let (kept, rej) = filter_reviews(&[raw("a", "খুব ভালো")], 3);
        assert!(kept.is_empty());
        assert_eq!(rej[0].reason, RejectReason::TooShort);
    }

    #[test]
    fn latin_words_are_mixed_language() {
        let (kept, rej) = filter_reviews(&[raw("a", "খাবার was good")], 3);
        assert!(kept.is_empty());
        assert_eq!(rej[0].reason, RejectReason::MixedLanguage);
    }

    #[test]
    fn short_wins_over_mixed() {
        let (_, rej) = filter_reviews(&[raw("a", "good food")], 3);
        assert_eq!(rej[0].reason, RejectReason::TooShort);
    }

    #[test]
    fn strips_punctuation_digits_emoji() {
        let text = "খাবার।ভালো, দাম ২০০ টাকা 👍🏽 দারুণ!!! ❤️";
        assert_eq!(normalize_text(text), "খাবার ভালো দাম টাকা দারুণ");
    }

    #[test]
    fn keeps_joiners_inside_words() {
        let word = "র\u{200D}্যাব";
        assert_eq!(normalize_text(&format!("{word} 👨\u{200D}👩")), word);
    }

    #[test]
    fn empty_input() {
        let (kept, rej) = filter_reviews(&[], 3);
        assert!(kept.is_empty() && rej.is_empty());
    }

    proptest! {
        #[test]
        fn idempotent_and_clean(texts in proptest::collection::vec("[ক-হ a-z০-৯0-9,.!।😀 ]{0,30}", 0..20)) {
            let input: Vec<RawReview> = texts
                .iter()
                .enumerate()
                .map(|(i, t)| raw(&i.to_string(), t))
                .collect();
            let (kept, _) = filter_reviews(&input, 3);
            for r in &kept {
                prop_assert!(!r.text.chars().any(is_stripped_char));
                prop_assert!(r.text.split_whitespace().count() >= 3);
            }
            let (again, rej) = filter_reviews(&kept, 3);
            prop_assert_eq!(&again, &kept);
            prop_assert!(rej.is_empty());
        }
    }
}
