use super::TrainError;
use crate::corpus::Label;
use crate::nn::lstm::{lstm_step_backward, StepCache};
use crate::nn::{axpy, dot, outer_acc, ForwardCache, Hyperparameters, LstmParams, ModelParams, Tensor};

/// Gradient of the mean batch cross-entropy with respect to every parameter.
///
/// `caches[r]` must come from a training-mode forward pass of the batch's
/// `r`-th sequence with the same `model`.
pub fn backward(
    model: &ModelParams,
    hp: &Hyperparameters,
    caches: &[ForwardCache],
    labels: &[Label],
) -> Result<ModelParams, TrainError> {
    if caches.len() != labels.len() {
        return Err(TrainError::CacheMismatch(format!(
            "{} caches for {} labels",
            caches.len(),
            labels.len()
        )));
    }
    if caches.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let mut grads = model.zeros_like();
    let scale = 1.0 / caches.len() as f64;
    for (cache, label) in caches.iter().zip(labels) {
        let dlogit = (cache.probability - label.target()) * scale;
        accumulate_example(model, hp, cache, dlogit, &mut grads)?;
    }
    Ok(grads)
}

/// Adds one example's contribution to `grads`, given the loss gradient with
/// respect to its logit.
pub fn accumulate_example(
    model: &ModelParams,
    hp: &Hyperparameters,
    cache: &ForwardCache,
    dlogit: f64,
    grads: &mut ModelParams,
) -> Result<(), TrainError> {
    let (l, h, dl1, dl2) = (hp.seq_len, hp.hidden, hp.dense1, hp.dense2);
    if cache.indices.len() != l
        || cache.dense2_out.shape() != [l, dl2]
        || cache.bilstm_out.shape() != [l, 2 * h]
        || cache.lstm.forward.len() != l
        || cache.lstm.backward.len() != l
    {
        return Err(TrainError::CacheMismatch(format!(
            "cache built for a different architecture (indices {}, dense2 {:?})",
            cache.indices.len(),
            cache.dense2_out.shape()
        )));
    }

    // Head: logit = head_w · flatten(dense2_out) + head_b.
    grads.head_b.data_mut()[0] += dlogit;
    axpy(grads.head_w.data_mut(), dlogit, cache.dense2_out.data());
    let mut d_dense2 = model.head_w.clone();
    d_dense2.scale(dlogit);

    // Dense 2 (linear) and dropout.
    let mut d_dense1 = Tensor::zeros(&[l, dl1]);
    for t in 0..l {
        let dy = &d_dense2.data()[t * dl2..(t + 1) * dl2];
        outer_acc(&mut grads.dense2_w, cache.dropped.row(t), dy);
        axpy(grads.dense2_b.data_mut(), 1.0, dy);
        let row = d_dense1.row_mut(t);
        for (i, v) in row.iter_mut().enumerate() {
            *v = dot(model.dense2_w.row(i), dy);
        }
        if let Some(mask) = &cache.dropout_mask {
            for (v, m) in row.iter_mut().zip(&mask[t * dl1..(t + 1) * dl1]) {
                *v *= m;
            }
        }
        // ReLU
        for (v, &a) in row.iter_mut().zip(cache.dense1_out.row(t)) {
            if a <= 0.0 {
                *v = 0.0;
            }
        }
    }

    // Dense 1.
    let mut d_hidden = Tensor::zeros(&[l, 2 * h]);
    for t in 0..l {
        let da = d_dense1.row(t);
        outer_acc(&mut grads.dense1_w, cache.bilstm_out.row(t), da);
        axpy(grads.dense1_b.data_mut(), 1.0, da);
        let row = d_hidden.row_mut(t);
        for (k, v) in row.iter_mut().enumerate() {
            *v = dot(model.dense1_w.row(k), da);
        }
    }

    // Both LSTM directions, then the embedding rows they read.
    let d = hp.embedding_dim;
    let mut d_input = Tensor::zeros(&[l, d]);
    bptt(
        &cache.lstm.forward,
        &model.forward,
        &mut grads.forward,
        hp,
        (0..l).rev(),
        |t| &d_hidden.row(t)[..h],
        &mut d_input,
    );
    bptt(
        &cache.lstm.backward,
        &model.backward,
        &mut grads.backward,
        hp,
        0..l,
        |t| &d_hidden.row(t)[h..],
        &mut d_input,
    );
    for (t, &idx) in cache.indices.iter().enumerate() {
        axpy(grads.embedding.row_mut(idx), 1.0, d_input.row(t));
    }
    Ok(())
}

/// Backpropagation through time for one direction. `order` lists sequence
/// positions from the last processed step to the first.
fn bptt<'a>(
    steps: &[StepCache],
    params: &LstmParams,
    grads: &mut LstmParams,
    hp: &Hyperparameters,
    order: impl Iterator<Item = usize>,
    d_out: impl Fn(usize) -> &'a [f64],
    d_input: &mut Tensor,
) {
    let h = hp.hidden;
    let mut dh_carry = vec![0.0; h];
    let mut dm_carry = vec![0.0; h];
    for t in order {
        let mut dh = d_out(t).to_vec();
        axpy(&mut dh, 1.0, &dh_carry);
        let (dh_prev, dm_prev) = lstm_step_backward(
            &steps[t],
            params,
            hp.hidden_variant,
            &dh,
            &dm_carry,
            grads,
            d_input.row_mut(t),
        );
        dh_carry = dh_prev;
        dm_carry = dm_prev;
    }
}
