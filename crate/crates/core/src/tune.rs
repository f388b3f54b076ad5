//! Coordinate-wise hyperparameter search: one hyperparameter at a time,
//! keeping the candidate with the best validation accuracy.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use crate::nn::{Hyperparameters, OptimizerKind};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TuneError {
    #[error("search space or order is empty")]
    EmptySpace,
    #[error("hyperparameter {0} has no candidates")]
    NoCandidates(ParamName),
    #[error("hyperparameter {0} listed twice")]
    Duplicate(ParamName),
    #[error("hyperparameter {0} is not in the search space")]
    NotInSpace(ParamName),
    #[error("unknown hyperparameter {0:?}")]
    UnknownName(String),
    #[error("candidate {value} does not fit {name}")]
    WrongType { name: ParamName, value: ParamValue },
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamName {
    EmbeddingDim,
    BatchSize,
    Dropout,
    Optimizer,
    LearningRate,
    Epochs,
}

impl ParamName {
    pub const ALL: [ParamName; 6] = [
        ParamName::EmbeddingDim,
        ParamName::BatchSize,
        ParamName::Dropout,
        ParamName::Optimizer,
        ParamName::LearningRate,
        ParamName::Epochs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::EmbeddingDim => "embedding_dim",
            ParamName::BatchSize => "batch_size",
            ParamName::Dropout => "dropout",
            ParamName::Optimizer => "optimizer",
            ParamName::LearningRate => "learning_rate",
            ParamName::Epochs => "epochs",
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = TuneError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParamName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| TuneError::UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Int(usize),
    Real(f64),
    Optimizer(OptimizerKind),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Optimizer(o) => write!(f, "{o}"),
        }
    }
}

/// Writes `value` into the field named `name`.
pub fn apply(hp: &mut Hyperparameters, name: ParamName, value: ParamValue) -> Result<(), TuneError> {
    match (name, value) {
        (ParamName::EmbeddingDim, ParamValue::Int(v)) => hp.embedding_dim = v,
        (ParamName::BatchSize, ParamValue::Int(v)) => hp.batch_size = v,
        (ParamName::Epochs, ParamValue::Int(v)) => hp.epochs = v,
        (ParamName::Dropout, ParamValue::Real(v)) => hp.dropout = v,
        (ParamName::LearningRate, ParamValue::Real(v)) => hp.learning_rate = v,
        (ParamName::Optimizer, ParamValue::Optimizer(o)) => hp.optimizer = o,
        _ => return Err(TuneError::WrongType { name, value }),
    }
    Ok(())
}

/// Ordered candidate lists, one per hyperparameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub dims: Vec<(ParamName, Vec<ParamValue>)>,
}

impl SearchSpace {
    /// The published grid.
    pub fn standard() -> Self {
        let ints = |v: &[usize]| v.iter().map(|&x| ParamValue::Int(x)).collect();
        let reals = |v: &[f64]| v.iter().map(|&x| ParamValue::Real(x)).collect();
        SearchSpace {
            dims: vec![
                (
                    ParamName::EmbeddingDim,
                    ints(&[8, 16, 32, 64, 100, 128, 200, 256, 400, 512, 600, 700, 800, 1024]),
                ),
                (ParamName::BatchSize, ints(&[4, 8, 16, 32, 64, 128, 256, 512])),
                (
                    ParamName::Dropout,
                    reals(&[
                        0.1, 0.15, 0.2, 0.23, 0.27, 0.3, 0.33, 0.36, 0.4, 0.43, 0.46, 0.5, 0.54, 0.57, 0.6, 0.63,
                        0.66, 0.69, 0.72, 0.75,
                    ]),
                ),
                (
                    ParamName::Optimizer,
                    OptimizerKind::ALL.iter().map(|&o| ParamValue::Optimizer(o)).collect(),
                ),
                (
                    ParamName::LearningRate,
                    reals(&[
                        0.9, 0.6, 0.3, 0.1, 0.09, 0.06, 0.03, 0.01, 0.009, 0.006, 0.003, 0.001, 0.0009, 0.0006,
                        0.0003, 0.0001, 0.00001, 0.000001,
                    ]),
                ),
                (
                    ParamName::Epochs,
                    ints(&[4, 6, 8, 10, 12, 14, 16, 18, 20, 25, 30, 35, 40, 45, 50]),
                ),
            ],
        }
    }

    /// Starting point of the published search: batch 32, dropout 0.1, Adam,
    /// learning rate 0.01, 20 epochs. Embedding size is searched first and
    /// keeps whatever `base` holds until then.
    pub fn standard_initial(base: &Hyperparameters) -> Hyperparameters {
        Hyperparameters {
            batch_size: 32,
            dropout: 0.1,
            optimizer: OptimizerKind::Adam,
            learning_rate: 0.01,
            epochs: 20,
            ..base.clone()
        }
    }

    pub fn names(&self) -> Vec<ParamName> {
        self.dims.iter().map(|d| d.0).collect()
    }

    pub fn candidates(&self, name: ParamName) -> Option<&[ParamValue]> {
        self.dims.iter().find(|d| d.0 == name).map(|d| d.1.as_slice())
    }

    pub fn evaluations(&self) -> usize {
        self.dims.iter().map(|d| d.1.len()).sum()
    }

    /// Keeps only `names`, in the space's own order.
    pub fn restrict(&self, names: &[ParamName]) -> SearchSpace {
        SearchSpace {
            dims: self.dims.iter().filter(|d| names.contains(&d.0)).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    /// 1-based coordinate pass.
    pub pass: usize,
    pub param: ParamName,
    pub value: ParamValue,
    pub config: Hyperparameters,
    pub val_accuracy: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchTrace {
    pub entries: Vec<TraceEntry>,
    pub winner: Hyperparameters,
}

impl SearchTrace {
    /// `pass,param,value,val_accuracy,seconds`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pass,param,value,val_accuracy,seconds\n");
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{:.6},{:.3}",
                e.pass, e.param, e.value, e.val_accuracy, e.seconds
            )
            .unwrap();
        }
        out
    }
}

/// Searches the coordinates in `order`, each over its full candidate list
/// with the other hyperparameters at their current values. The first
/// candidate with the highest accuracy wins its pass.
pub fn coordinate_search<F, E>(
    space: &SearchSpace,
    initial: &Hyperparameters,
    order: &[ParamName],
    mut evaluate: F,
) -> Result<(Hyperparameters, SearchTrace), TuneError>
where
    F: FnMut(&Hyperparameters) -> Result<f64, E>,
    E: fmt::Display,
{
    if space.dims.is_empty() || order.is_empty() {
        return Err(TuneError::EmptySpace);
    }
    for (k, name) in order.iter().enumerate() {
        if order[..k].contains(name) {
            return Err(TuneError::Duplicate(*name));
        }
        match space.candidates(*name) {
            None => return Err(TuneError::NotInSpace(*name)),
            Some([]) => return Err(TuneError::NoCandidates(*name)),
            Some(_) => {}
        }
    }
    let mut current = initial.clone();
    let mut entries = Vec::with_capacity(space.evaluations());
    for (pass, &name) in order.iter().enumerate() {
        let mut best: Option<(f64, ParamValue)> = None;
        for &value in space.candidates(name).unwrap() {
            let mut config = current.clone();
            apply(&mut config, name, value)?;
            let start = Instant::now();
            let acc = evaluate(&config).map_err(|e| TuneError::Evaluation(e.to_string()))?;
            let seconds = start.elapsed().as_secs_f64();
            if best.map_or(true, |(b, _)| acc > b) {
                best = Some((acc, value));
            }
            entries.push(TraceEntry {
                pass: pass + 1,
                param: name,
                value,
                config,
                val_accuracy: acc,
                seconds,
            });
        }
        apply(&mut current, name, best.unwrap().1)?;
    }
    Ok((
        current.clone(),
        SearchTrace {
            entries,
            winner: current,
        },
    ))
}
