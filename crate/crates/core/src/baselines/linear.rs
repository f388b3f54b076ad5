use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BaselineParams, SparseVector};
use crate::corpus::Label;

/// Weight vector and bias of a linear decision function `w·x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        LinearModel {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    pub fn margin(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Full-batch gradient descent on mean log loss plus `λ/2·‖w‖²`. The bias is
/// not regularized.
pub fn fit_logistic(xs: &[SparseVector], ys: &[Label], dim: usize, p: &BaselineParams) -> LinearModel {
    let mut m = LinearModel::zeros(dim);
    let n = xs.len() as f64;
    let mut grad = vec![0.0; dim];
    for _ in 0..p.linear_epochs {
        grad.iter_mut().zip(&m.weights).for_each(|(g, w)| *g = p.linear_lambda * w);
        let mut grad_b = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            let r = (sigmoid(m.margin(x)) - y.target()) / n;
            for &(i, v) in x.entries() {
                grad[i] += r * v;
            }
            grad_b += r;
        }
        for (w, g) in m.weights.iter_mut().zip(&grad) {
            *w -= p.linear_learning_rate * g;
        }
        m.bias -= p.linear_learning_rate * grad_b;
    }
    m
}

/// Stochastic subgradient descent on `λ/2·‖w‖² + hinge`, one pass over a
/// seeded shuffle per epoch, step size `η0 / (1 + η0·λ·t)`.
pub fn fit_svm(xs: &[SparseVector], ys: &[Label], dim: usize, p: &BaselineParams, seed: u64) -> LinearModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    // w = scale · v keeps the shrink step O(1).
    let mut v = vec![0.0; dim];
    let mut scale = 1.0;
    let mut bias = 0.0;
    let mut t = 0u64;
    let (eta0, lambda) = (p.linear_learning_rate, p.linear_lambda);
    for _ in 0..p.linear_epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            let eta = eta0 / (1.0 + eta0 * lambda * t as f64);
            t += 1;
            let y = if ys[k] == Label::Positive { 1.0 } else { -1.0 };
            let margin = scale * xs[k].dot_dense(&v) + bias;
            scale *= 1.0 - eta * lambda;
            if y * margin < 1.0 {
                for &(i, x) in xs[k].entries() {
                    v[i] += eta * y * x / scale;
                }
                bias += eta * y;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
        }
    }
    LinearModel {
        weights: v.into_iter().map(|w| w * scale).collect(),
        bias,
    }
}
