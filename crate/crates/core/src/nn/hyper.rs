use std::fmt;
use std::str::FromStr;

use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Sgd,
    RmsProp,
    Adam,
    Nadam,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 4] = [
        OptimizerKind::Sgd,
        OptimizerKind::RmsProp,
        OptimizerKind::Adam,
        OptimizerKind::Nadam,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::RmsProp => "rmsprop",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Nadam => "nadam",
        }
    }

    pub(crate) fn code(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown optimizer `{s}` (sgd, rmsprop, adam, nadam)"))
    }
}

/// How the LSTM hidden vector is read out of the remember vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HiddenVariant {
    /// `h = tanh(o ⊙ m)`
    #[default]
    Squashed,
    /// `h = o ⊙ tanh(m)`
    Standard,
}

impl HiddenVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            HiddenVariant::Squashed => "squashed",
            HiddenVariant::Standard => "standard",
        }
    }
}

impl fmt::Display for HiddenVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HiddenVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "squashed" => Ok(HiddenVariant::Squashed),
            "standard" => Ok(HiddenVariant::Standard),
            other => Err(format!("unknown hidden variant `{other}` (squashed, standard)")),
        }
    }
}

/// Architecture sizes and training knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    pub vocab_size: usize,
    pub embedding_dim: usize,
    pub seq_len: usize,
    pub hidden: usize,
    pub dense1: usize,
    pub dense2: usize,
    pub dropout: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub threshold: f64,
    pub hidden_variant: HiddenVariant,
    pub seed: u64,
}

impl Default for Hyperparameters {
    /// Tuned optimum: d = 128, batch 64, dropout 0.46, RMSprop at 1e-4 for
    /// 10 epochs, l = 150, dense widths 64 and 14.
    fn default() -> Self {
        Hyperparameters {
            vocab_size: 2,
            embedding_dim: 128,
            seq_len: 150,
            hidden: 64,
            dense1: 64,
            dense2: 14,
            dropout: 0.46,
            batch_size: 64,
            learning_rate: 1e-4,
            epochs: 10,
            optimizer: OptimizerKind::RmsProp,
            threshold: 0.5,
            hidden_variant: HiddenVariant::Squashed,
            seed: 0,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<(), NnError> {
        let sizes = [
            ("vocab_size", self.vocab_size),
            ("embedding_dim", self.embedding_dim),
            ("seq_len", self.seq_len),
            ("hidden", self.hidden),
            ("dense1", self.dense1),
            ("dense2", self.dense2),
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
        ];
        for (name, v) in sizes {
            if v == 0 {
                return Err(NnError::InvalidHyperparameter(format!("{name} must be ≥ 1")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(NnError::InvalidHyperparameter(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(NnError::InvalidHyperparameter(format!(
                "threshold {} outside (0, 1)",
                self.threshold
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NnError::InvalidHyperparameter(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            )));
        }
        Ok(())
    }
}
