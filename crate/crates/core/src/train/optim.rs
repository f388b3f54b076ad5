use super::TrainError;
use crate::nn::{ModelParams, NnError, OptimizerKind, Tensor};

/// RMSprop squared-gradient decay.
pub const RHO: f64 = 0.9;
pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-7;

/// Per-parameter accumulators for one of the supported update rules.
///
/// * SGD: `w ← w − η g`
/// * RMSprop: `v ← ρ v + (1 − ρ) g²`, `w ← w − η g / (√v + ε)`
/// * Adam: bias-corrected first and second moments, `w ← w − η m̂ / (√v̂ + ε)`
/// * Nadam: Adam with the Nesterov look-ahead numerator
///   `β₁ m̂ + (1 − β₁) g / (1 − β₁ᵗ)`
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub step: u64,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind) -> Self {
        OptimizerState {
            kind,
            step: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    /// First-moment accumulators (Adam, Nadam).
    pub fn first_moments(&self) -> &[Tensor] {
        &self.first
    }

    /// Second-moment or squared-gradient accumulators.
    pub fn second_moments(&self) -> &[Tensor] {
        &self.second
    }

    fn ensure_accumulators(&mut self, grads: &[&Tensor]) -> Result<(), NnError> {
        if self.second.is_empty() {
            self.second = grads.iter().map(|g| Tensor::zeros(g.shape())).collect();
            if matches!(self.kind, OptimizerKind::Adam | OptimizerKind::Nadam) {
                self.first = self.second.clone();
            }
        }
        if self.second.len() != grads.len()
            || self.second.iter().zip(grads).any(|(a, g)| !a.same_shape(g))
        {
            return Err(NnError::ShapeMismatch(
                "optimizer accumulators do not match the gradients".into(),
            ));
        }
        Ok(())
    }

    /// One update of `params` along `grads` with learning rate `lr`.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[&Tensor], lr: f64) -> Result<(), TrainError> {
        if params.len() != grads.len() || params.iter().zip(grads).any(|(p, g)| !p.same_shape(g)) {
            return Err(NnError::ShapeMismatch("parameters and gradients differ".into()).into());
        }
        self.ensure_accumulators(grads)?;
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - BETA1.powi(t);
        let bc2 = 1.0 - BETA2.powi(t);

        for (k, (param, grad)) in params.iter_mut().zip(grads).enumerate() {
            let w = param.data_mut();
            let g = grad.data();
            match self.kind {
                OptimizerKind::Sgd => {
                    for (wi, gi) in w.iter_mut().zip(g) {
                        *wi -= lr * gi;
                    }
                }
                OptimizerKind::RmsProp => {
                    let v = self.second[k].data_mut();
                    for i in 0..w.len() {
                        v[i] = RHO * v[i] + (1.0 - RHO) * g[i] * g[i];
                        w[i] -= lr * g[i] / (v[i].sqrt() + EPSILON);
                    }
                }
                OptimizerKind::Adam | OptimizerKind::Nadam => {
                    let nesterov = self.kind == OptimizerKind::Nadam;
                    let m = self.first[k].data_mut();
                    let v = self.second[k].data_mut();
                    for i in 0..w.len() {
                        m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
                        v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
                        let m_hat = m[i] / bc1;
                        let v_hat = v[i] / bc2;
                        let numer = if nesterov {
                            BETA1 * m_hat + (1.0 - BETA1) * g[i] / bc1
                        } else {
                            m_hat
                        };
                        w[i] -= lr * numer / (v_hat.sqrt() + EPSILON);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn step_model(&mut self, model: &mut ModelParams, grads: &ModelParams, lr: f64) -> Result<(), TrainError> {
        let grads = grads.tensors();
        self.step(&mut model.tensors_mut(), &grads, lr)
    }
}
