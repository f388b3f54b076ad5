use super::{BaselineParams, SparseVector};
use crate::corpus::Label;

/// Multinomial naive Bayes; index 0 is Negative, 1 is Positive.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayes {
    pub log_prior: [f64; 2],
    pub log_likelihood: [Vec<f64>; 2],
}

fn class(label: Label) -> usize {
    match label {
        Label::Negative => 0,
        Label::Positive => 1,
    }
}

/// Feature values are read as term counts. Laplace smoothing `α` per term.
pub fn fit_naive_bayes(xs: &[SparseVector], ys: &[Label], dim: usize, p: &BaselineParams) -> NaiveBayes {
    let mut docs = [0usize; 2];
    let mut counts = [vec![0.0; dim], vec![0.0; dim]];
    for (x, &y) in xs.iter().zip(ys) {
        let c = class(y);
        docs[c] += 1;
        for &(i, v) in x.entries() {
            counts[c][i] += v;
        }
    }
    let n = xs.len() as f64;
    let log_prior = [(docs[0] as f64 / n).ln(), (docs[1] as f64 / n).ln()];
    let alpha = p.nb_alpha;
    let log_likelihood = counts.map(|cs| {
        let total: f64 = cs.iter().sum::<f64>() + alpha * dim as f64;
        cs.iter().map(|&c| ((c + alpha) / total).ln()).collect()
    });
    NaiveBayes {
        log_prior,
        log_likelihood,
    }
}

impl NaiveBayes {
    /// Unnormalized log posteriors `[negative, positive]`.
    pub fn joint_log(&self, x: &SparseVector) -> [f64; 2] {
        let mut out = self.log_prior;
        for (c, o) in out.iter_mut().enumerate() {
            for &(i, v) in x.entries() {
                *o += v * self.log_likelihood[c][i];
            }
        }
        out
    }

    /// Positive-class posterior probability.
    pub fn probability(&self, x: &SparseVector) -> f64 {
        let [neg, pos] = self.joint_log(x);
        super::linear::sigmoid(pos - neg)
    }

    pub fn dim(&self) -> usize {
        self.log_likelihood[0].len()
    }
}
