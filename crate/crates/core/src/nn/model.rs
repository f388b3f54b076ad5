use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layers::{dense_forward, dropout_forward, embedding_forward, head_logit, Activation, Mode};
use super::lstm::{bilstm_forward_cached, sigmoid, BiLstmCache, LstmParams};
use super::{Hyperparameters, NnError, Tensor};
use crate::corpus::Label;
use crate::textvec::EncodedSequence;

/// Embedding bound for initialization.
const EMBEDDING_INIT: f64 = 0.05;

/// All learnable tensors of the BiLSTM classifier. The same type holds
/// gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// `V_k × d`
    pub embedding: Tensor,
    pub forward: LstmParams,
    pub backward: LstmParams,
    /// `2h × dl1`
    pub dense1_w: Tensor,
    pub dense1_b: Tensor,
    /// `dl1 × dl2`
    pub dense2_w: Tensor,
    pub dense2_b: Tensor,
    /// `l·dl2`
    pub head_w: Tensor,
    /// `[1]`
    pub head_b: Tensor,
}

fn glorot<R: Rng + ?Sized>(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut R) -> Tensor {
    Tensor::uniform(shape, (6.0 / (fan_in + fan_out) as f64).sqrt(), rng)
}

/// Seeded initialization: Glorot-uniform matrices, embedding in ±0.05,
/// zero biases except the forget gates at 1.
pub fn init_model(hp: &Hyperparameters) -> Result<ModelParams, NnError> {
    hp.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let (d, h, l) = (hp.embedding_dim, hp.hidden, hp.seq_len);
    let embedding = Tensor::uniform(&[hp.vocab_size, d], EMBEDDING_INIT, &mut rng);
    let forward = LstmParams::init(h, d, &mut rng);
    let backward = LstmParams::init(h, d, &mut rng);
    let dense1_w = glorot(&[2 * h, hp.dense1], 2 * h, hp.dense1, &mut rng);
    let dense2_w = glorot(&[hp.dense1, hp.dense2], hp.dense1, hp.dense2, &mut rng);
    let head_w = glorot(&[l * hp.dense2], l * hp.dense2, 1, &mut rng);
    Ok(ModelParams {
        embedding,
        forward,
        backward,
        dense1_w,
        dense1_b: Tensor::zeros(&[hp.dense1]),
        dense2_w,
        dense2_b: Tensor::zeros(&[hp.dense2]),
        head_w,
        head_b: Tensor::zeros(&[1]),
    })
}

impl ModelParams {
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.tensors_mut().into_iter().for_each(|t| t.fill(0.0));
        z
    }

    /// Tensors in a fixed order: embedding, forward LSTM, backward LSTM,
    /// dense1, dense2, head.
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut v = vec![&self.embedding];
        v.extend(self.forward.tensors());
        v.extend(self.backward.tensors());
        v.extend([
            &self.dense1_w,
            &self.dense1_b,
            &self.dense2_w,
            &self.dense2_b,
            &self.head_w,
            &self.head_b,
        ]);
        v
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v = vec![&mut self.embedding];
        v.extend(self.forward.tensors_mut());
        v.extend(self.backward.tensors_mut());
        v.extend([
            &mut self.dense1_w,
            &mut self.dense1_b,
            &mut self.dense2_w,
            &mut self.dense2_b,
            &mut self.head_w,
            &mut self.head_b,
        ]);
        v
    }

    /// Names matching [`ModelParams::tensors`].
    pub fn tensor_names() -> Vec<String> {
        let mut names = vec!["embedding".to_string()];
        for dir in ["forward", "backward"] {
            for gate in ["update", "forget", "output", "candidate"] {
                for part in ["w", "i", "b"] {
                    names.push(format!("{dir}.{gate}.{part}"));
                }
            }
        }
        names.extend(
            ["dense1.w", "dense1.b", "dense2.w", "dense2.b", "head.w", "head.b"].map(String::from),
        );
        names
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }

    /// Verifies every shape against `hp`.
    pub fn check(&self, hp: &Hyperparameters) -> Result<(), NnError> {
        let (d, h, l) = (hp.embedding_dim, hp.hidden, hp.seq_len);
        self.embedding.expect_shape(&[hp.vocab_size, d], "embedding")?;
        for lstm in [&self.forward, &self.backward] {
            for g in &lstm.gates {
                g.w.expect_shape(&[h, h], "recurrent weights")?;
                g.i.expect_shape(&[h, d], "input projection")?;
                g.b.expect_shape(&[h], "gate bias")?;
            }
        }
        self.dense1_w.expect_shape(&[2 * h, hp.dense1], "dense1 weights")?;
        self.dense1_b.expect_shape(&[hp.dense1], "dense1 bias")?;
        self.dense2_w.expect_shape(&[hp.dense1, hp.dense2], "dense2 weights")?;
        self.dense2_b.expect_shape(&[hp.dense2], "dense2 bias")?;
        self.head_w.expect_shape(&[l * hp.dense2], "head weights")?;
        self.head_b.expect_shape(&[1], "head bias")?;
        Ok(())
    }
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub indices: Vec<usize>,
    pub lstm: BiLstmCache,
    /// `l × 2h` concatenated hidden states.
    pub bilstm_out: Tensor,
    /// `l × dl1` after ReLU, before dropout.
    pub dense1_out: Tensor,
    pub dropout_mask: Option<Vec<f64>>,
    /// `l × dl1` after dropout.
    pub dropped: Tensor,
    /// `l × dl2`
    pub dense2_out: Tensor,
    pub logit: f64,
    pub probability: f64,
}

/// Full forward pass. `rng` drives dropout and is only read in training mode.
pub fn forward<R: Rng + ?Sized>(
    model: &ModelParams,
    hp: &Hyperparameters,
    seq: &EncodedSequence,
    mode: Mode,
    rng: &mut R,
) -> Result<ForwardCache, NnError> {
    if seq.len() != hp.seq_len {
        return Err(NnError::ShapeMismatch(format!(
            "sequence length {} vs configured {}",
            seq.len(),
            hp.seq_len
        )));
    }
    let x = embedding_forward(seq, &model.embedding)?;
    let (bilstm_out, lstm) = bilstm_forward_cached(&x, &model.forward, &model.backward, hp.hidden_variant)?;
    let dense1_out = dense_forward(&bilstm_out, &model.dense1_w, &model.dense1_b, Activation::Relu)?;
    let (dropped, dropout_mask) = dropout_forward(&dense1_out, hp.dropout, mode, rng);
    let dense2_out = dense_forward(&dropped, &model.dense2_w, &model.dense2_b, Activation::None)?;
    let logit = head_logit(&dense2_out, &model.head_w, model.head_b.data()[0])?;
    Ok(ForwardCache {
        indices: seq.indices.clone(),
        lstm,
        bilstm_out,
        dense1_out,
        dropout_mask,
        dropped,
        dense2_out,
        logit,
        probability: sigmoid(logit),
    })
}

/// Positive-class probability with dropout disabled.
pub fn predict_probability(model: &ModelParams, hp: &Hyperparameters, seq: &EncodedSequence) -> Result<f64, NnError> {
    // Inference never draws from the generator.
    let mut rng = rand::rngs::mock::StepRng::new(0, 0);
    forward(model, hp, seq, Mode::Infer, &mut rng).map(|c| c.probability)
}

/// Positive iff the probability strictly exceeds the threshold.
pub fn classify(probability: f64, threshold: f64) -> Label {
    Label::from_bool(probability > threshold)
}

pub fn predict(model: &ModelParams, hp: &Hyperparameters, seq: &EncodedSequence) -> Result<(Label, f64), NnError> {
    let p = predict_probability(model, hp, seq)?;
    Ok((classify(p, hp.threshold), p))
}
