use std::collections::{BTreeMap, HashSet};

use super::BaselineError;
use crate::textvec::{Vocabulary, RESERVED};

/// Sparse feature vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Sorts by index and drops explicit zeros. Panics on a repeated index.
    pub fn new(mut entries: Vec<(usize, f64)>) -> Self {
        entries.retain(|&(_, v)| v != 0.0);
        entries.sort_by_key(|&(i, _)| i);
        assert!(
            entries.windows(2).all(|w| w[0].0 < w[1].0),
            "repeated index in sparse vector"
        );
        SparseVector { entries }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Value at `index`, zero when absent.
    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |k| self.entries[k].1)
    }

    /// One past the largest stored index.
    pub fn min_dim(&self) -> usize {
        self.entries.last().map_or(0, |&(i, _)| i + 1)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn dot_dense(&self, w: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * w[i]).sum()
    }
}

/// Vocabulary of the training documents plus smoothed inverse document
/// frequencies. Feature `j` is vocabulary word `j + RESERVED`.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    pub vocabulary: Vocabulary,
    pub idf: Vec<f64>,
}

/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`.
pub fn tfidf_fit<D, S>(train_docs: &[D]) -> Result<TfidfModel, BaselineError>
where
    D: AsRef<[S]>,
    S: AsRef<str>,
{
    if train_docs.is_empty() {
        return Err(BaselineError::EmptyCorpus);
    }
    let vocabulary = Vocabulary::build(train_docs.iter().map(|d| d.as_ref().iter()));
    let mut df = vec![0usize; vocabulary.size() - RESERVED];
    for doc in train_docs {
        let seen: HashSet<&str> = doc.as_ref().iter().map(|t| t.as_ref()).collect();
        for t in seen {
            if let Some(i) = vocabulary.get(t) {
                df[i - RESERVED] += 1;
            }
        }
    }
    let n = train_docs.len() as f64;
    let idf = df
        .iter()
        .map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
        .collect();
    Ok(TfidfModel { vocabulary, idf })
}

impl TfidfModel {
    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    /// Raw in-vocabulary term counts; unseen tokens are ignored.
    pub fn counts<S: AsRef<str>>(&self, doc: &[S]) -> SparseVector {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for t in doc {
            if let Some(i) = self.vocabulary.get(t.as_ref()) {
                *counts.entry(i - RESERVED).or_default() += 1.0;
            }
        }
        SparseVector {
            entries: counts.into_iter().collect(),
        }
    }
}

/// `count(t)·idf(t)`, scaled to unit L2 norm.
pub fn tfidf_transform<S: AsRef<str>>(model: &TfidfModel, doc: &[S]) -> SparseVector {
    let mut v = model.counts(doc);
    for e in &mut v.entries {
        e.1 *= model.idf[e.0];
    }
    let norm = v.norm();
    if norm > 0.0 {
        for e in &mut v.entries {
            e.1 /= norm;
        }
    }
    v
}
