//! Numeric core of the BiLSTM classifier: tensors, the LSTM cell, the
//! bidirectional layer, time-distributed dense layers, dropout and the
//! sigmoid output head.

mod hyper;
pub mod layers;
pub mod lstm;
pub mod model;
pub mod reference;
mod tensor;

pub use hyper::{HiddenVariant, Hyperparameters, OptimizerKind};
pub use layers::{dense_forward, dropout_forward, embedding_forward, output_head, Activation, Mode};
pub use lstm::{bilstm_forward, lstm_step, sigmoid, LstmParams, LstmState, StepCache};
pub use model::{classify, forward, init_model, predict, predict_probability, ForwardCache, ModelParams};
pub use tensor::Tensor;

pub(crate) use tensor::{axpy, dot, outer_acc};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("index {index} out of range for vocabulary of {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
}
