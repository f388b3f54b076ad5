use rand::Rng;

use super::lstm::sigmoid;
use super::tensor::dot;
use super::{NnError, Tensor};
use crate::textvec::EncodedSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Stacks the embedding rows for each index into an `l×d` matrix.
pub fn embedding_forward(seq: &EncodedSequence, embedding: &Tensor) -> Result<Tensor, NnError> {
    let (vocab, d) = (embedding.rows(), embedding.cols());
    let mut out = Tensor::zeros(&[seq.len(), d]);
    for (t, &idx) in seq.indices.iter().enumerate() {
        if idx >= vocab {
            return Err(NnError::IndexOutOfRange { index: idx, size: vocab });
        }
        out.row_mut(t).copy_from_slice(embedding.row(idx));
    }
    Ok(out)
}

/// Time-distributed affine layer: every row of `x` (a wide) goes through the
/// same `a×b` weights and `b` bias.
pub fn dense_forward(x: &Tensor, w: &Tensor, bias: &Tensor, activation: Activation) -> Result<Tensor, NnError> {
    let (a, b) = (w.rows(), w.cols());
    if x.shape().len() != 2 || x.cols() != a || w.shape().len() != 2 || bias.shape() != [b] {
        return Err(NnError::ShapeMismatch(format!(
            "dense: input {:?}, weights {:?}, bias {:?}",
            x.shape(),
            w.shape(),
            bias.shape()
        )));
    }
    let l = x.rows();
    let mut out = Tensor::zeros(&[l, b]);
    for t in 0..l {
        let row = out.row_mut(t);
        row.copy_from_slice(bias.data());
        for (i, &xi) in x.row(t).iter().enumerate() {
            if xi != 0.0 {
                super::tensor::axpy(row, xi, w.row(i));
            }
        }
        if activation == Activation::Relu {
            row.iter_mut().for_each(|v| *v = v.max(0.0));
        }
    }
    Ok(out)
}

/// Inverted dropout. In training mode every element is zeroed with
/// probability `p` and survivors are scaled by `1/(1-p)`; the returned mask
/// holds the per-element multiplier. Inference is the identity.
pub fn dropout_forward<R: Rng + ?Sized>(
    x: &Tensor,
    p: f64,
    mode: Mode,
    rng: &mut R,
) -> (Tensor, Option<Vec<f64>>) {
    if mode == Mode::Infer || p == 0.0 {
        return (x.clone(), None);
    }
    let keep = 1.0 / (1.0 - p);
    let mask: Vec<f64> = (0..x.len())
        .map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep })
        .collect();
    let mut out = x.clone();
    for (v, m) in out.data_mut().iter_mut().zip(&mask) {
        *v *= m;
    }
    (out, Some(mask))
}

/// Logit of the flattened `l×dl2` input under a single affine projection.
pub fn head_logit(x: &Tensor, weights: &Tensor, bias: f64) -> Result<f64, NnError> {
    if x.len() != weights.len() {
        return Err(NnError::ShapeMismatch(format!(
            "head: flattened input {} vs weights {}",
            x.len(),
            weights.len()
        )));
    }
    Ok(dot(x.data(), weights.data()) + bias)
}

/// Flatten, project to a scalar, squash into (0, 1).
pub fn output_head(x: &Tensor, weights: &Tensor, bias: f64) -> Result<f64, NnError> {
    head_logit(x, weights, bias).map(sigmoid)
}
