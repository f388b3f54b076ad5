//! Text to fixed-length index sequences: whitespace tokenization, a
//! frequency-ordered vocabulary, and pre-padding / tail truncation.

use std::collections::HashMap;
use std::fmt::Write as _;

pub const PAD: usize = 0;
pub const OOV: usize = 1;
pub const RESERVED: usize = 2;

/// Default sequence length.
pub const DEFAULT_SEQ_LEN: usize = 150;

pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Word to index map. Indices 0 and 1 are reserved for padding and
/// out-of-vocabulary tokens; words occupy `2..size()`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    word_to_index: HashMap<String, usize>,
    words: Vec<String>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum VocabError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Vocabulary {
    /// Builds from token lists: most frequent first, ties broken by the
    /// token's lexicographic order.
    pub fn build<I, D, S>(docs: I) -> Self
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for doc in docs {
            for tok in doc {
                *counts.entry(tok.as_ref().to_string()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self::from_words(ranked.into_iter().map(|(w, _)| w).collect())
    }

    /// Words in index order starting at index 2. Panics on duplicates.
    pub fn from_words(words: Vec<String>) -> Self {
        let word_to_index: HashMap<String, usize> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i + RESERVED))
            .collect();
        assert_eq!(word_to_index.len(), words.len(), "duplicate vocabulary entry");
        Vocabulary {
            word_to_index,
            words,
        }
    }

    /// Total index range including the two reserved slots.
    pub fn size(&self) -> usize {
        self.words.len() + RESERVED
    }

    pub fn index(&self, token: &str) -> usize {
        self.word_to_index.get(token).copied().unwrap_or(OOV)
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.word_to_index.get(token).copied()
    }

    /// Word for an index ≥ 2.
    pub fn word(&self, index: usize) -> Option<&str> {
        index
            .checked_sub(RESERVED)
            .and_then(|i| self.words.get(i))
            .map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// `<index>\t<token>` lines, ascending.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, w) in self.words.iter().enumerate() {
            let _ = writeln!(out, "{}\t{}", i + RESERVED, w);
        }
        out
    }

    pub fn from_tsv(input: &str) -> Result<Self, VocabError> {
        let mut words = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (n, line) in input.lines().enumerate() {
            let err = |message: String| VocabError::Parse {
                line: n + 1,
                message,
            };
            if line.is_empty() {
                continue;
            }
            let (idx, tok) = line
                .split_once('\t')
                .ok_or_else(|| err("expected `<index>\\t<token>`".into()))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(format!("bad index `{idx}`")))?;
            if idx != words.len() + RESERVED {
                return Err(err(format!(
                    "index {idx} out of sequence (expected {})",
                    words.len() + RESERVED
                )));
            }
            if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                return Err(err(format!("invalid token `{tok}`")));
            }
            if !seen.insert(tok.to_string()) {
                return Err(err(format!("duplicate token `{tok}`")));
            }
            words.push(tok.to_string());
        }
        Ok(Self::from_words(words))
    }
}

/// A review as a fixed-length index vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSequence {
    pub indices: Vec<usize>,
    /// Token count before padding or truncation.
    pub original_length: usize,
}

impl EncodedSequence {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn padding(&self) -> usize {
        self.indices.len() - self.original_length.min(self.indices.len())
    }
}

/// Maps tokens to indices (unknown → OOV), keeps the first `len` tokens and
/// left-pads shorter sequences with PAD.
pub fn encode_pad<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary, len: usize) -> EncodedSequence {
    assert!(len >= 1, "sequence length must be at least 1");
    let kept = tokens.len().min(len);
    let mut indices = vec![PAD; len - kept];
    indices.extend(tokens[..kept].iter().map(|t| vocab.index(t.as_ref())));
    EncodedSequence {
        indices,
        original_length: tokens.len(),
    }
}

pub fn encode_text(text: &str, vocab: &Vocabulary, len: usize) -> EncodedSequence {
    encode_pad(&tokenize(text), vocab, len)
}

/// Drops leading PAD entries and maps indices back to words; OOV and
/// interior PAD entries come back as `None`.
pub fn decode(seq: &EncodedSequence, vocab: &Vocabulary) -> Vec<Option<String>> {
    seq.indices
        .iter()
        .skip_while(|&&i| i == PAD)
        .map(|&i| vocab.word(i).map(str::to_string))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn whitespace_tokens() {
        assert_eq!(tokenize("a b  c"), vec!["a", "b", "c"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("টোকেন১ টোকেন২").len(), 2);
        assert_eq!(tokenize(" \t x\u{3000}y\n"), vec!["x", "y"]);
    }

    #[test]
    fn frequency_order() {
        let v = Vocabulary::build([vec!["a", "b", "a"]]);
        assert_eq!(v.get("a"), Some(2));
        assert_eq!(v.get("b"), Some(3));
        assert_eq!(v.size(), 4);
    }

    #[test]
    fn ties_are_lexicographic() {
        let v = Vocabulary::build([vec!["z", "y", "x", "y"]]);
        assert_eq!(v.words(), ["y", "x", "z"]);
    }

    #[test]
    fn empty_vocabulary() {
        let v = Vocabulary::build(Vec::<Vec<String>>::new());
        assert_eq!(v.size(), 2);
        assert_eq!(v.index("anything"), OOV);
    }

    #[test]
    fn deterministic_build() {
        let docs = vec![vec!["ক", "খ", "গ", "ক"], vec!["খ", "ঘ"]];
        assert_eq!(Vocabulary::build(docs.clone()), Vocabulary::build(docs));
    }

    #[test]
    fn pre_pad_and_oov() {
        let v = Vocabulary::from_words(vec!["a".into(), "b".into()]);
        let s = encode_pad(&["a", "b", "c"], &v, 5);
        assert_eq!(s.indices, vec![0, 0, 2, 3, 1]);
        assert_eq!(s.padding(), 2);
    }

    #[test]
    fn truncation_keeps_head() {
        let v = Vocabulary::from_words(vec!["a".into(), "b".into()]);
        let s = encode_pad(&["a", "b", "a", "b"], &v, 2);
        assert_eq!(s.indices, vec![2, 3]);
        assert_eq!(s.original_length, 4);
        assert_eq!(s.padding(), 0);
        let exact = encode_pad(&["b", "a"], &v, 2);
        assert_eq!(exact.indices, vec![3, 2]);
    }

    #[test]
    fn default_length() {
        let v = Vocabulary::default();
        assert_eq!(encode_text("ক খ", &v, DEFAULT_SEQ_LEN).len(), 150);
    }

    #[test]
    fn tsv_round_trip_and_validation() {
        let v = Vocabulary::build([vec!["ক", "খ", "ক"]]);
        assert_eq!(v.to_tsv(), "2\tক\n3\tখ\n");
        assert_eq!(Vocabulary::from_tsv(&v.to_tsv()).unwrap(), v);
        assert!(Vocabulary::from_tsv("3\tক\n").is_err());
        assert!(Vocabulary::from_tsv("2\tক\n3\tক\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip(docs in proptest::collection::vec(proptest::collection::vec("[a-e]{1,3}", 0..12), 1..6), len in 1usize..20) {
            let vocab = Vocabulary::build(docs.iter().map(|d| d.iter().map(String::as_str)));
            let sizes: std::collections::HashSet<usize> = vocab.words().iter().map(|w| vocab.index(w)).collect();
            prop_assert_eq!(sizes, (RESERVED..vocab.size()).collect());
            for doc in &docs {
                let s = encode_pad(doc, &vocab, len);
                prop_assert_eq!(s.len(), len);
                prop_assert!(s.indices.iter().all(|&i| i < vocab.size()));
                prop_assert_eq!(s.indices.iter().take_while(|&&i| i == PAD).count(), len - doc.len().min(len));
                if doc.len() <= len {
                    let back: Vec<String> = decode(&s, &vocab).into_iter().map(Option::unwrap).collect();
                    prop_assert_eq!(&back, doc);
                }
            }
        }
    }
}
