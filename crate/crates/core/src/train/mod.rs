//! Training: cross-entropy loss, backpropagation through time, optimizers,
//! the mini-batch loop and a finite-difference gradient checker.

mod backward;
mod gradcheck;
mod history;
mod loss;
mod optim;
mod trainer;

pub use backward::{accumulate_example, backward};
pub use gradcheck::{gradient_check, GradCheckReport};
pub use history::{EpochRecord, TrainingHistory};
pub use loss::{bce_loss, CLIP};
pub use optim::{OptimizerState, BETA1, BETA2, EPSILON, RHO};
pub use trainer::{encode_reviews, evaluate, train_model, train_model_with, Example};

use crate::nn::NnError;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum TrainError {
    #[error("predictions and targets differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty batch")]
    EmptyBatch,
    #[error("forward caches do not match the batch: {0}")]
    CacheMismatch(String),
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("training diverged at epoch {epoch}: non-finite {what}")]
    Diverged { epoch: usize, what: &'static str },
    #[error(transparent)]
    Nn(#[from] NnError),
}
