//! Binary sentiment classification of Bengali restaurant reviews.
//!
//! The crate covers the whole pipeline: corpus cleaning and agreement
//! measurement ([`corpus`]), index encoding ([`textvec`]), a bidirectional
//! LSTM classifier with hand-written backpropagation ([`nn`], [`train`]),
//! TF-IDF baselines ([`baselines`]), evaluation ([`metrics`]), coordinate-wise
//! hyperparameter search ([`tune`]) and the command-line front end ([`cli`]).

pub mod baselines;
pub mod cli;
pub mod container;
pub mod corpus;
pub mod metrics;
pub mod nn;
pub mod synthetic;
pub mod textvec;
pub mod train;
pub mod tune;

pub use corpus::{Label, LabeledReview, RawReview};
pub use nn::{Hyperparameters, ModelParams, Tensor};
pub use textvec::Vocabulary;
