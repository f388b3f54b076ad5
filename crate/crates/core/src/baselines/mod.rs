//! TF-IDF features and five classical classifiers: logistic regression,
//! CART decision tree, random forest, multinomial naive Bayes and a linear
//! SVM.

mod bayes;
mod forest;
mod linear;
mod tfidf;
mod tree;

use std::fmt;
use std::str::FromStr;

pub use bayes::{fit_naive_bayes, NaiveBayes};
pub use forest::{fit_forest, RandomForest};
pub use linear::{fit_logistic, fit_svm, LinearModel};
pub use tfidf::{tfidf_fit, tfidf_transform, SparseVector, TfidfModel};
pub use tree::{DecisionTree, TreeNode};

use crate::corpus::Label;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BaselineError {
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("training labels contain a single class")]
    SingleClassCorpus,
    #[error("{features} feature vectors but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("vector needs dimension {needed}, model has {dim}")]
    DimensionMismatch { needed: usize, dim: usize },
    #[error("unknown baseline kind {0:?}")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    LogisticRegression,
    DecisionTree,
    RandomForest,
    NaiveBayes,
    Svm,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 5] = [
        BaselineKind::LogisticRegression,
        BaselineKind::DecisionTree,
        BaselineKind::RandomForest,
        BaselineKind::NaiveBayes,
        BaselineKind::Svm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BaselineKind::LogisticRegression => "lr",
            BaselineKind::DecisionTree => "dt",
            BaselineKind::RandomForest => "rf",
            BaselineKind::NaiveBayes => "nb",
            BaselineKind::Svm => "svm",
        }
    }

    /// Naive Bayes is fitted on raw term counts, the rest on TF-IDF.
    pub fn uses_counts(self) -> bool {
        self == BaselineKind::NaiveBayes
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaselineKind {
    type Err = BaselineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| BaselineError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineParams {
    /// L2 strength for LR and SVM.
    pub linear_lambda: f64,
    pub linear_epochs: usize,
    /// LR step size; SVM initial step size.
    pub linear_learning_rate: f64,
    pub nb_alpha: f64,
    pub max_depth: usize,
    /// Nodes with fewer samples become leaves.
    pub min_node_size: usize,
    pub trees: usize,
    pub bootstrap: bool,
    /// Search every feature at every forest split instead of √F.
    pub full_features: bool,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams {
            linear_lambda: 1e-4,
            linear_epochs: 200,
            linear_learning_rate: 0.1,
            nb_alpha: 1.0,
            max_depth: 20,
            min_node_size: 2,
            trees: 100,
            bootstrap: true,
            full_features: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaselineModel {
    Logistic(LinearModel),
    Tree(DecisionTree),
    Forest(RandomForest),
    NaiveBayes(NaiveBayes),
    Svm(LinearModel),
}

impl BaselineModel {
    pub fn kind(&self) -> BaselineKind {
        match self {
            BaselineModel::Logistic(_) => BaselineKind::LogisticRegression,
            BaselineModel::Tree(_) => BaselineKind::DecisionTree,
            BaselineModel::Forest(_) => BaselineKind::RandomForest,
            BaselineModel::NaiveBayes(_) => BaselineKind::NaiveBayes,
            BaselineModel::Svm(_) => BaselineKind::Svm,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BaselineModel::Logistic(m) | BaselineModel::Svm(m) => m.weights.len(),
            BaselineModel::Tree(t) => t.dim,
            BaselineModel::Forest(f) => f.trees.first().map_or(0, |t| t.dim),
            BaselineModel::NaiveBayes(nb) => nb.dim(),
        }
    }
}

/// Fits one classifier. `dim` is the feature space size; every vector must
/// fit inside it.
pub fn train_baseline(
    kind: BaselineKind,
    features: &[SparseVector],
    labels: &[Label],
    dim: usize,
    params: &BaselineParams,
    seed: u64,
) -> Result<BaselineModel, BaselineError> {
    if features.len() != labels.len() {
        return Err(BaselineError::LengthMismatch {
            features: features.len(),
            labels: labels.len(),
        });
    }
    if features.is_empty() {
        return Err(BaselineError::EmptyCorpus);
    }
    if !labels.contains(&Label::Positive) || !labels.contains(&Label::Negative) {
        return Err(BaselineError::SingleClassCorpus);
    }
    if let Some(needed) = features.iter().map(SparseVector::min_dim).max().filter(|&d| d > dim) {
        return Err(BaselineError::DimensionMismatch { needed, dim });
    }
    Ok(match kind {
        BaselineKind::LogisticRegression => BaselineModel::Logistic(fit_logistic(features, labels, dim, params)),
        BaselineKind::Svm => BaselineModel::Svm(fit_svm(features, labels, dim, params, seed)),
        BaselineKind::NaiveBayes => BaselineModel::NaiveBayes(fit_naive_bayes(features, labels, dim, params)),
        BaselineKind::DecisionTree => {
            let p = BaselineParams {
                trees: 1,
                bootstrap: false,
                full_features: true,
                ..params.clone()
            };
            let mut forest = fit_forest(features, labels, dim, &p, seed);
            BaselineModel::Tree(forest.trees.remove(0))
        }
        BaselineKind::RandomForest => BaselineModel::Forest(fit_forest(features, labels, dim, params, seed)),
    })
}

/// Label and ranking score. LR and NB score with the positive probability,
/// trees with the positive leaf fraction, forests with the positive vote
/// fraction (threshold 0.5, ties Negative), SVM with the signed margin
/// (threshold 0).
pub fn predict_baseline(model: &BaselineModel, x: &SparseVector) -> Result<(Label, f64), BaselineError> {
    let dim = model.dim();
    if x.min_dim() > dim {
        return Err(BaselineError::DimensionMismatch {
            needed: x.min_dim(),
            dim,
        });
    }
    Ok(match model {
        BaselineModel::Logistic(m) => {
            let p = linear::sigmoid(m.margin(x));
            (Label::from_bool(p > 0.5), p)
        }
        BaselineModel::Svm(m) => {
            let s = m.margin(x);
            (Label::from_bool(s > 0.0), s)
        }
        BaselineModel::NaiveBayes(nb) => {
            let [neg, pos] = nb.joint_log(x);
            (Label::from_bool(pos > neg), nb.probability(x))
        }
        BaselineModel::Tree(t) => {
            let s = t.leaf_score(x);
            (Label::from_bool(s > 0.5), s)
        }
        BaselineModel::Forest(f) => {
            let s = f.vote_fraction(x);
            (Label::from_bool(s > 0.5), s)
        }
    })
}

/// TF-IDF vectorizer plus a classifier fitted on its output.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselinePipeline {
    pub tfidf: TfidfModel,
    pub model: BaselineModel,
}

impl BaselinePipeline {
    pub fn fit<D, S>(
        kind: BaselineKind,
        docs: &[D],
        labels: &[Label],
        params: &BaselineParams,
        seed: u64,
    ) -> Result<Self, BaselineError>
    where
        D: AsRef<[S]>,
        S: AsRef<str>,
    {
        let tfidf = tfidf_fit(docs)?;
        let features: Vec<SparseVector> = docs.iter().map(|d| featurize(&tfidf, kind, d.as_ref())).collect();
        let model = train_baseline(kind, &features, labels, tfidf.dim(), params, seed)?;
        Ok(BaselinePipeline { tfidf, model })
    }

    pub fn predict<S: AsRef<str>>(&self, doc: &[S]) -> (Label, f64) {
        let x = featurize(&self.tfidf, self.model.kind(), doc);
        predict_baseline(&self.model, &x).expect("vectorizer and model share a dimension")
    }
}

/// Feature vector `kind` expects: counts for NB, TF-IDF otherwise.
pub fn featurize<S: AsRef<str>>(tfidf: &TfidfModel, kind: BaselineKind, doc: &[S]) -> SparseVector {
    if kind.uses_counts() {
        tfidf.counts(doc)
    } else {
        tfidf_transform(tfidf, doc)
    }
}
