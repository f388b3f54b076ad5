use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{backward, bce_loss, EpochRecord, OptimizerState, TrainError, TrainingHistory};
use crate::corpus::{Label, LabeledReview};
use crate::nn::{classify, forward, init_model, predict_probability, Hyperparameters, Mode, ModelParams};
use crate::textvec::{encode_text, EncodedSequence, Vocabulary};

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub seq: EncodedSequence,
    pub label: Label,
}

pub fn encode_reviews(reviews: &[LabeledReview], vocab: &Vocabulary, seq_len: usize) -> Vec<Example> {
    reviews
        .iter()
        .map(|r| Example {
            seq: encode_text(&r.text, vocab, seq_len),
            label: r.label,
        })
        .collect()
}

/// SplitMix64 finalizer over `(seed, stream, index)`.
pub(crate) fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SHUFFLE_STREAM: u64 = 1;
const DROPOUT_STREAM: u64 = 2;

/// Inference-mode mean loss and accuracy over `examples`.
pub fn evaluate(model: &ModelParams, hp: &Hyperparameters, examples: &[Example]) -> Result<(f64, f64), TrainError> {
    if examples.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let mut probs = Vec::with_capacity(examples.len());
    let mut correct = 0usize;
    for ex in examples {
        let p = predict_probability(model, hp, &ex.seq)?;
        if classify(p, hp.threshold) == ex.label {
            correct += 1;
        }
        probs.push(p);
    }
    let targets: Vec<f64> = examples.iter().map(|e| e.label.target()).collect();
    let loss = bce_loss(&probs, &targets)?;
    Ok((loss, correct as f64 / examples.len() as f64))
}

/// Mini-batch training for `hp.epochs` epochs; returns the final-epoch model.
pub fn train_model(
    train: &[Example],
    val: &[Example],
    hp: &Hyperparameters,
) -> Result<(ModelParams, TrainingHistory), TrainError> {
    train_model_with(train, val, hp, |_| {})
}

/// As [`train_model`], calling `on_epoch` after each epoch is recorded.
pub fn train_model_with(
    train: &[Example],
    val: &[Example],
    hp: &Hyperparameters,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(ModelParams, TrainingHistory), TrainError> {
    if train.is_empty() {
        return Err(TrainError::EmptySplit("training"));
    }
    if val.is_empty() {
        return Err(TrainError::EmptySplit("validation"));
    }
    let mut model = init_model(hp)?;
    let mut optimizer = OptimizerState::new(hp.optimizer);
    let mut history = TrainingHistory::default();
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=hp.epochs {
        let e = epoch as u64;
        order.sort_unstable();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(hp.seed, SHUFFLE_STREAM, e)));
        let mut dropout_rng = ChaCha8Rng::seed_from_u64(derive_seed(hp.seed, DROPOUT_STREAM, e));

        for batch in order.chunks(hp.batch_size) {
            let mut caches = Vec::with_capacity(batch.len());
            for &i in batch {
                caches.push(forward(&model, hp, &train[i].seq, Mode::Train, &mut dropout_rng)?);
            }
            let labels: Vec<Label> = batch.iter().map(|&i| train[i].label).collect();
            let probs: Vec<f64> = caches.iter().map(|c| c.probability).collect();
            let targets: Vec<f64> = labels.iter().map(|l| l.target()).collect();
            if !bce_loss(&probs, &targets)?.is_finite() {
                return Err(TrainError::Diverged { epoch, what: "loss" });
            }
            let grads = backward(&model, hp, &caches, &labels)?;
            if !grads.is_finite() {
                return Err(TrainError::Diverged { epoch, what: "gradient" });
            }
            optimizer.step_model(&mut model, &grads, hp.learning_rate)?;
            if !model.is_finite() {
                return Err(TrainError::Diverged { epoch, what: "parameters" });
            }
        }

        let (train_loss, train_accuracy) = evaluate(&model, hp, train)?;
        let (val_loss, val_accuracy) = evaluate(&model, hp, val)?;
        if !(train_loss.is_finite() && val_loss.is_finite()) {
            return Err(TrainError::Diverged { epoch, what: "loss" });
        }
        let record = EpochRecord {
            epoch,
            train_loss,
            train_accuracy,
            val_loss,
            val_accuracy,
        };
        on_epoch(&record);
        history.epochs.push(record);
    }
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{separable_corpus, SyntheticSpec};
    use crate::train::gradcheck::loss_on;

    fn small_hp(vocab: usize) -> Hyperparameters {
        Hyperparameters {
            vocab_size: vocab,
            embedding_dim: 4,
            seq_len: 6,
            hidden: 3,
            dense1: 3,
            dense2: 2,
            dropout: 0.2,
            batch_size: 4,
            epochs: 2,
            learning_rate: 1e-3,
            seed: 5,
            ..Hyperparameters::default()
        }
    }

    fn data() -> (Vec<Example>, Vec<Example>, usize) {
        let corpus = separable_corpus(&SyntheticSpec {
            reviews: 20,
            seed: 1,
            ..SyntheticSpec::default()
        });
        let vocab = Vocabulary::build(corpus.iter().map(|r| r.tokens()));
        let ex = encode_reviews(&corpus, &vocab, 6);
        let (a, b) = ex.split_at(15);
        (a.to_vec(), b.to_vec(), vocab.size())
    }

    #[test]
    fn history_length_and_determinism() {
        let (train, val, v) = data();
        let hp = small_hp(v);
        let (m1, h1) = train_model(&train, &val, &hp).unwrap();
        let (m2, h2) = train_model(&train, &val, &hp).unwrap();
        assert_eq!(h1.len(), 2);
        assert_eq!(h1, h2);
        assert_eq!(m1, m2);
        for r in &h1.epochs {
            assert!((0.0..=1.0).contains(&r.train_accuracy));
            assert!((0.0..=1.0).contains(&r.val_accuracy));
        }
    }

    #[test]
    fn empty_splits_rejected() {
        let (train, val, v) = data();
        let hp = small_hp(v);
        assert_eq!(train_model(&[], &val, &hp).unwrap_err(), TrainError::EmptySplit("training"));
        assert_eq!(train_model(&train, &[], &hp).unwrap_err(), TrainError::EmptySplit("validation"));
    }

    #[test]
    fn huge_learning_rate_diverges_or_survives_finitely() {
        let (train, val, v) = data();
        let hp = Hyperparameters {
            optimizer: crate::nn::OptimizerKind::Sgd,
            learning_rate: 1e300,
            ..small_hp(v)
        };
        match train_model(&train, &val, &hp) {
            Err(TrainError::Diverged { .. }) => {}
            Ok((m, h)) => {
                assert!(m.is_finite());
                assert!(h.epochs.iter().all(|r| r.train_loss.is_finite()));
            }
            Err(other) => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn small_step_descends() {
        let (train, _, v) = data();
        let batch = &train[..4];
        for seed in 0..20 {
            let hp = Hyperparameters {
                dropout: 0.0,
                seed,
                ..small_hp(v)
            };
            let mut model = init_model(&hp).unwrap();
            let before = loss_on(&model, &hp, batch).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let caches: Vec<_> = batch
                .iter()
                .map(|e| forward(&model, &hp, &e.seq, Mode::Train, &mut rng).unwrap())
                .collect();
            let labels: Vec<Label> = batch.iter().map(|e| e.label).collect();
            let grads = backward(&model, &hp, &caches, &labels).unwrap();
            let mut opt = OptimizerState::new(crate::nn::OptimizerKind::Sgd);
            opt.step_model(&mut model, &grads, 1e-4).unwrap();
            let after = loss_on(&model, &hp, batch).unwrap();
            assert!(after <= before, "seed {seed}: {after} > {before}");
        }
    }
}
