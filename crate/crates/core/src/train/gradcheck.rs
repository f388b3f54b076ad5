use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{backward, Example, TrainError};
use crate::nn::reference::{flatten_params, reference_loss, DoubleDouble, Real};
use crate::nn::{forward, Hyperparameters, Mode, ModelParams};

/// Largest disagreement between analytic and central-difference gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Tensor and flat index where the maximum occurred.
    pub tensor: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    /// Number of scalar parameters compared.
    pub checked: usize,
}

#[cfg(test)]
/// Mean inference-mode cross-entropy over `examples`.
pub(crate) fn loss_on(model: &ModelParams, hp: &Hyperparameters, examples: &[Example]) -> Result<f64, TrainError> {
    let mut probs = Vec::with_capacity(examples.len());
    for ex in examples {
        probs.push(crate::nn::predict_probability(model, hp, &ex.seq)?);
    }
    let targets: Vec<f64> = examples.iter().map(|e| e.label.target()).collect();
    super::bce_loss(&probs, &targets)
}

/// Compares the backward pass against `(L(w+ε) − L(w−ε)) / 2ε` for every
/// scalar parameter. Relative error is
/// `|a − n| / max(|a|, |n|, 1e-12)`; dropout is switched off.
///
/// The numeric side runs the scalar reference forward pass in double-double
/// arithmetic, so rounding in `L` does not swamp small components.
pub fn gradient_check(
    model: &ModelParams,
    hp: &Hyperparameters,
    example: &Example,
    eps: f64,
) -> Result<GradCheckReport, TrainError> {
    let hp = Hyperparameters {
        dropout: 0.0,
        ..hp.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let cache = forward(model, &hp, &example.seq, Mode::Train, &mut rng)?;
    let grads = backward(model, &hp, &[cache], &[example.label])?;

    let names = ModelParams::tensor_names();
    let analytic: Vec<Vec<f64>> = grads.tensors().iter().map(|t| t.data().to_vec()).collect();
    let mut probe: Vec<Vec<DoubleDouble>> = flatten_params(model);
    let step = DoubleDouble::new(eps);
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        tensor: names[0].clone(),
        index: 0,
        analytic: 0.0,
        numeric: 0.0,
        checked: 0,
    };
    for (ti, name) in names.iter().enumerate() {
        for j in 0..analytic[ti].len() {
            let orig = probe[ti][j];
            probe[ti][j] = orig + step;
            let up = reference_loss(&probe, &hp, &example.seq, example.label);
            probe[ti][j] = orig - step;
            let down = reference_loss(&probe, &hp, &example.seq, example.label);
            probe[ti][j] = orig;

            let numeric = ((up - down) / (step + step)).to_f64();
            let a = analytic[ti][j];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-12);
            report.checked += 1;
            if rel > report.max_rel_error {
                report = GradCheckReport {
                    max_rel_error: rel,
                    tensor: name.clone(),
                    index: j,
                    analytic: a,
                    numeric,
                    checked: report.checked,
                };
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use crate::nn::{init_model, HiddenVariant};
    use crate::textvec::EncodedSequence;

    #[test]
    fn tiny_model_passes_both_variants() {
        for variant in [HiddenVariant::Squashed, HiddenVariant::Standard] {
            let hp = Hyperparameters {
                vocab_size: 8,
                embedding_dim: 3,
                seq_len: 5,
                hidden: 4,
                dense1: 3,
                dense2: 2,
                dropout: 0.0,
                hidden_variant: variant,
                seed: 11,
                ..Hyperparameters::default()
            };
            let model = init_model(&hp).unwrap();
            let ex = Example {
                seq: EncodedSequence {
                    indices: vec![0, 3, 5, 3, 7],
                    original_length: 4,
                },
                label: Label::Positive,
            };
            let r = gradient_check(&model, &hp, &ex, 1e-5).unwrap();
            assert_eq!(r.checked, model.parameter_count());
            assert!(r.max_rel_error <= 1e-5, "{variant:?}: {r:?}");
        }
    }
}
