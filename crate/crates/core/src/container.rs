//! Binary model files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "SNTM" | version u16 | kind u8 | hyperparameter block | vocabulary block | tensors
//! ```
//!
//! Blocks are prefixed by their byte length (u32). The vocabulary block is a
//! u64 word count followed by u32-length-prefixed UTF-8 words. Tensors are a
//! u64 count, then per tensor a u8 rank, u64 dimensions and row-major f64
//! values.

use std::fs;
use std::path::Path;

use crate::baselines::{
    BaselineKind, BaselineModel, BaselineParams, BaselinePipeline, DecisionTree, LinearModel, NaiveBayes,
    RandomForest, TfidfModel, TreeNode,
};
use crate::nn::{init_model, HiddenVariant, Hyperparameters, ModelParams, OptimizerKind, Tensor};
use crate::textvec::Vocabulary;

pub const MAGIC: &[u8; 4] = b"SNTM";
pub const VERSION: u16 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ContainerError {
    #[error("corrupt model container: {0}")]
    CorruptContainer(String),
    #[error("unsupported container version {0} (expected {VERSION})")]
    VersionUnsupported(u16),
    #[error("{path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn corrupt<T>(msg: impl Into<String>) -> Result<T, ContainerError> {
    Err(ContainerError::CorruptContainer(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelContainer {
    Network {
        hp: Hyperparameters,
        vocab: Vocabulary,
        params: ModelParams,
    },
    Baseline {
        params: BaselineParams,
        pipeline: BaselinePipeline,
    },
}

impl ModelContainer {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelContainer::Network { .. } => "network",
            ModelContainer::Baseline { pipeline, .. } => pipeline.model.kind().as_str(),
        }
    }
}

fn kind_tag(c: &ModelContainer) -> u8 {
    match c {
        ModelContainer::Network { .. } => 0,
        ModelContainer::Baseline { pipeline, .. } => match pipeline.model.kind() {
            BaselineKind::LogisticRegression => 1,
            BaselineKind::DecisionTree => 2,
            BaselineKind::RandomForest => 3,
            BaselineKind::NaiveBayes => 4,
            BaselineKind::Svm => 5,
        },
    }
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.buf.extend(v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend(v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend(v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend(v.to_le_bytes());
    }
    fn block(&mut self, inner: Writer) {
        self.u32(inner.buf.len() as u32);
        self.buf.extend(inner.buf);
    }
    fn tensor(&mut self, shape: &[usize], data: &[f64]) {
        self.u8(shape.len() as u8);
        for &d in shape {
            self.usize(d);
        }
        for &v in data {
            self.f64(v);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], ContainerError> {
        if self.buf.len() - self.pos < n {
            return corrupt(format!("truncated while reading {what} at byte {}", self.pos));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self, what: &str) -> Result<u8, ContainerError> {
        Ok(self.take(1, what)?[0])
    }
    fn u16(&mut self, what: &str) -> Result<u16, ContainerError> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }
    fn u32(&mut self, what: &str) -> Result<u32, ContainerError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn u64(&mut self, what: &str) -> Result<u64, ContainerError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn usize(&mut self, what: &str) -> Result<usize, ContainerError> {
        usize::try_from(self.u64(what)?).or_else(|_| corrupt(format!("{what} does not fit in usize")))
    }
    fn f64(&mut self, what: &str) -> Result<f64, ContainerError> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn block(&mut self, what: &str) -> Result<Reader<'a>, ContainerError> {
        let n = self.u32(what)? as usize;
        Ok(Reader {
            buf: self.take(n, what)?,
            pos: 0,
        })
    }
    fn finish(&self, what: &str) -> Result<(), ContainerError> {
        if self.pos != self.buf.len() {
            return corrupt(format!("{} trailing bytes after {what}", self.buf.len() - self.pos));
        }
        Ok(())
    }
    fn tensor(&mut self) -> Result<Tensor, ContainerError> {
        let rank = self.u8("tensor rank")? as usize;
        if !(1..=2).contains(&rank) {
            return corrupt(format!("tensor rank {rank}"));
        }
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(self.usize("tensor shape")?);
        }
        let n = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .filter(|&n| n <= (self.buf.len() - self.pos) / 8);
        let Some(n) = n else {
            return corrupt(format!("tensor shape {shape:?} exceeds the file"));
        };
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(self.f64("tensor data")?);
        }
        Tensor::from_vec(&shape, data).or_else(|e| corrupt(e.to_string()))
    }
}

fn write_hp(hp: &Hyperparameters) -> Writer {
    let mut w = Writer::default();
    for v in [hp.vocab_size, hp.embedding_dim, hp.seq_len, hp.hidden, hp.dense1, hp.dense2] {
        w.usize(v);
    }
    w.f64(hp.dropout);
    w.usize(hp.batch_size);
    w.f64(hp.learning_rate);
    w.usize(hp.epochs);
    w.u8(hp.optimizer.code());
    w.f64(hp.threshold);
    w.u8(match hp.hidden_variant {
        HiddenVariant::Squashed => 0,
        HiddenVariant::Standard => 1,
    });
    w.u64(hp.seed);
    w
}

fn read_hp(r: &mut Reader) -> Result<Hyperparameters, ContainerError> {
    let mut sizes = [0usize; 6];
    for s in &mut sizes {
        *s = r.usize("hyperparameters")?;
    }
    let [vocab_size, embedding_dim, seq_len, hidden, dense1, dense2] = sizes;
    let dropout = r.f64("dropout")?;
    let batch_size = r.usize("batch size")?;
    let learning_rate = r.f64("learning rate")?;
    let epochs = r.usize("epochs")?;
    let code = r.u8("optimizer")?;
    let Some(optimizer) = OptimizerKind::from_code(code) else {
        return corrupt(format!("optimizer code {code}"));
    };
    let threshold = r.f64("threshold")?;
    let hidden_variant = match r.u8("hidden variant")? {
        0 => HiddenVariant::Squashed,
        1 => HiddenVariant::Standard,
        v => return corrupt(format!("hidden variant code {v}")),
    };
    let hp = Hyperparameters {
        vocab_size,
        embedding_dim,
        seq_len,
        hidden,
        dense1,
        dense2,
        dropout,
        batch_size,
        learning_rate,
        epochs,
        optimizer,
        threshold,
        hidden_variant,
        seed: r.u64("seed")?,
    };
    hp.validate().or_else(|e| corrupt(e.to_string()))?;
    Ok(hp)
}

fn write_baseline_params(p: &BaselineParams) -> Writer {
    let mut w = Writer::default();
    w.f64(p.linear_lambda);
    w.usize(p.linear_epochs);
    w.f64(p.linear_learning_rate);
    w.f64(p.nb_alpha);
    w.usize(p.max_depth);
    w.usize(p.min_node_size);
    w.usize(p.trees);
    w.u8(p.bootstrap as u8);
    w.u8(p.full_features as u8);
    w
}

fn read_bool(r: &mut Reader, what: &str) -> Result<bool, ContainerError> {
    match r.u8(what)? {
        0 => Ok(false),
        1 => Ok(true),
        v => corrupt(format!("{what} flag {v}")),
    }
}

fn read_baseline_params(r: &mut Reader) -> Result<BaselineParams, ContainerError> {
    Ok(BaselineParams {
        linear_lambda: r.f64("lambda")?,
        linear_epochs: r.usize("epochs")?,
        linear_learning_rate: r.f64("learning rate")?,
        nb_alpha: r.f64("alpha")?,
        max_depth: r.usize("max depth")?,
        min_node_size: r.usize("min node size")?,
        trees: r.usize("trees")?,
        bootstrap: read_bool(r, "bootstrap")?,
        full_features: read_bool(r, "full features")?,
    })
}

fn write_vocab(v: &Vocabulary) -> Writer {
    let mut w = Writer::default();
    w.usize(v.words().len());
    for word in v.words() {
        w.u32(word.len() as u32);
        w.buf.extend(word.as_bytes());
    }
    w
}

fn read_vocab(r: &mut Reader) -> Result<Vocabulary, ContainerError> {
    let n = r.usize("vocabulary size")?;
    let mut words = Vec::with_capacity(n.min(r.buf.len()));
    let mut seen = std::collections::HashSet::new();
    for _ in 0..n {
        let len = r.u32("word length")? as usize;
        let bytes = r.take(len, "word")?;
        let Ok(word) = std::str::from_utf8(bytes) else {
            return corrupt("vocabulary word is not UTF-8");
        };
        if !seen.insert(word) {
            return corrupt(format!("duplicate vocabulary word {word:?}"));
        }
        words.push(word.to_string());
    }
    Ok(Vocabulary::from_words(words))
}

/// Decision tree as an `[nodes, 5]` tensor. Split rows are
/// `(0, feature, threshold, left, right)`, leaf rows `(1, positive, 0, 0, 0)`.
fn tree_tensor(t: &DecisionTree) -> (Vec<usize>, Vec<f64>) {
    let mut data = Vec::with_capacity(t.nodes.len() * 5);
    for n in &t.nodes {
        match *n {
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => data.extend([0.0, feature as f64, threshold, left as f64, right as f64]),
            TreeNode::Leaf { positive } => data.extend([1.0, positive, 0.0, 0.0, 0.0]),
        }
    }
    (vec![t.nodes.len(), 5], data)
}

fn as_index(v: f64, limit: usize, what: &str) -> Result<usize, ContainerError> {
    if v >= 0.0 && v.fract() == 0.0 && v < limit as f64 {
        Ok(v as usize)
    } else {
        corrupt(format!("{what} {v} out of range"))
    }
}

fn tree_from(t: &Tensor, dim: usize) -> Result<DecisionTree, ContainerError> {
    if t.shape().len() != 2 || t.shape()[1] != 5 || t.shape()[0] == 0 {
        return corrupt(format!("tree tensor shape {:?}", t.shape()));
    }
    let n = t.shape()[0];
    let mut nodes = Vec::with_capacity(n);
    for row in t.data().chunks(5) {
        nodes.push(match row[0] {
            0.0 => TreeNode::Split {
                feature: as_index(row[1], dim, "tree feature")?,
                threshold: row[2],
                left: as_index(row[3], n, "tree child")?,
                right: as_index(row[4], n, "tree child")?,
            },
            1.0 => TreeNode::Leaf { positive: row[1] },
            v => return corrupt(format!("tree node tag {v}")),
        });
    }
    let tree = DecisionTree { dim, nodes };
    if !tree.is_well_formed() {
        return corrupt("tree nodes do not form a tree");
    }
    Ok(tree)
}

fn baseline_tensors(pipe: &BaselinePipeline) -> Vec<(Vec<usize>, Vec<f64>)> {
    let f = pipe.tfidf.dim();
    let mut out = vec![(vec![f], pipe.tfidf.idf.clone())];
    match &pipe.model {
        BaselineModel::Logistic(m) | BaselineModel::Svm(m) => {
            out.push((vec![f], m.weights.clone()));
            out.push((vec![1], vec![m.bias]));
        }
        BaselineModel::NaiveBayes(nb) => {
            out.push((vec![2], nb.log_prior.to_vec()));
            out.push((vec![2, f], nb.log_likelihood.concat()));
        }
        BaselineModel::Tree(t) => out.push(tree_tensor(t)),
        BaselineModel::Forest(rf) => {
            // Seeds are stored as raw bit patterns.
            out.push((vec![rf.seeds.len()], rf.seeds.iter().map(|&s| f64::from_bits(s)).collect()));
            out.extend(rf.trees.iter().map(tree_tensor));
        }
    }
    out
}

fn expect(t: &Tensor, shape: &[usize], what: &str) -> Result<(), ContainerError> {
    if t.shape() != shape {
        return corrupt(format!("{what} has shape {:?}, expected {shape:?}", t.shape()));
    }
    Ok(())
}

fn baseline_from(kind: BaselineKind, vocab: Vocabulary, tensors: Vec<Tensor>) -> Result<BaselinePipeline, ContainerError> {
    let f = vocab.size() - crate::textvec::RESERVED;
    let mut it = tensors.into_iter();
    let mut next = |what: &str| it.next().map_or_else(|| corrupt(format!("missing {what} tensor")), Ok);
    let idf = next("idf")?;
    expect(&idf, &[f], "idf")?;
    let tfidf = TfidfModel {
        vocabulary: vocab,
        idf: idf.into_data(),
    };
    let model = match kind {
        BaselineKind::LogisticRegression | BaselineKind::Svm => {
            let w = next("weights")?;
            expect(&w, &[f], "weights")?;
            let b = next("bias")?;
            expect(&b, &[1], "bias")?;
            let m = LinearModel {
                weights: w.into_data(),
                bias: b.data()[0],
            };
            if kind == BaselineKind::Svm {
                BaselineModel::Svm(m)
            } else {
                BaselineModel::Logistic(m)
            }
        }
        BaselineKind::NaiveBayes => {
            let prior = next("log prior")?;
            expect(&prior, &[2], "log prior")?;
            let ll = next("log likelihood")?;
            expect(&ll, &[2, f], "log likelihood")?;
            BaselineModel::NaiveBayes(NaiveBayes {
                log_prior: [prior.data()[0], prior.data()[1]],
                log_likelihood: [ll.row(0).to_vec(), ll.row(1).to_vec()],
            })
        }
        BaselineKind::DecisionTree => BaselineModel::Tree(tree_from(&next("tree")?, f)?),
        BaselineKind::RandomForest => {
            let seeds = next("seeds")?;
            if seeds.shape().len() != 1 || seeds.len() == 0 {
                return corrupt(format!("seed tensor shape {:?}", seeds.shape()));
            }
            let seeds: Vec<u64> = seeds.data().iter().map(|v| v.to_bits()).collect();
            let trees = (0..seeds.len())
                .map(|_| tree_from(&next("tree")?, f))
                .collect::<Result<Vec<_>, _>>()?;
            BaselineModel::Forest(RandomForest { trees, seeds })
        }
    };
    if it.next().is_some() {
        return corrupt("unexpected extra tensors");
    }
    Ok(BaselinePipeline { tfidf, model })
}

pub fn to_bytes(c: &ModelContainer) -> Vec<u8> {
    let mut w = Writer::default();
    w.buf.extend(MAGIC);
    w.u16(VERSION);
    w.u8(kind_tag(c));
    let tensors: Vec<(Vec<usize>, Vec<f64>)> = match c {
        ModelContainer::Network { hp, vocab, params } => {
            w.block(write_hp(hp));
            w.block(write_vocab(vocab));
            params
                .tensors()
                .iter()
                .map(|t| (t.shape().to_vec(), t.data().to_vec()))
                .collect()
        }
        ModelContainer::Baseline { params, pipeline } => {
            w.block(write_baseline_params(params));
            w.block(write_vocab(&pipeline.tfidf.vocabulary));
            baseline_tensors(pipeline)
        }
    };
    w.usize(tensors.len());
    for (shape, data) in &tensors {
        w.tensor(shape, data);
    }
    w.buf
}

pub fn from_bytes(bytes: &[u8]) -> Result<ModelContainer, ContainerError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return corrupt("bad magic bytes");
    }
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(ContainerError::VersionUnsupported(version));
    }
    let tag = r.u8("kind tag")?;
    let mut hp_block = r.block("hyperparameter block")?;
    let mut vocab_block = r.block("vocabulary block")?;
    let vocab = read_vocab(&mut vocab_block)?;
    vocab_block.finish("vocabulary")?;
    let count = r.usize("tensor count")?;
    let mut tensors = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        tensors.push(r.tensor()?);
    }
    r.finish("tensors")?;

    let kind = match tag {
        0 => None,
        1 => Some(BaselineKind::LogisticRegression),
        2 => Some(BaselineKind::DecisionTree),
        3 => Some(BaselineKind::RandomForest),
        4 => Some(BaselineKind::NaiveBayes),
        5 => Some(BaselineKind::Svm),
        t => return corrupt(format!("kind tag {t}")),
    };
    match kind {
        None => {
            let hp = read_hp(&mut hp_block)?;
            hp_block.finish("hyperparameters")?;
            if hp.vocab_size != vocab.size() {
                return corrupt(format!(
                    "vocabulary has {} entries, hyperparameters say {}",
                    vocab.size(),
                    hp.vocab_size
                ));
            }
            let mut params = init_model(&hp).or_else(|e| corrupt(e.to_string()))?;
            if tensors.len() != params.tensors().len() {
                return corrupt(format!("{} tensors, expected {}", tensors.len(), params.tensors().len()));
            }
            let names = ModelParams::tensor_names();
            for ((slot, t), name) in params.tensors_mut().into_iter().zip(tensors).zip(&names) {
                expect(&t, &slot.shape().to_vec(), name)?;
                *slot = t;
            }
            Ok(ModelContainer::Network { hp, vocab, params })
        }
        Some(kind) => {
            let params = read_baseline_params(&mut hp_block)?;
            hp_block.finish("baseline parameters")?;
            let pipeline = baseline_from(kind, vocab, tensors)?;
            Ok(ModelContainer::Baseline { params, pipeline })
        }
    }
}

pub fn save_model(c: &ModelContainer, path: &Path) -> Result<(), ContainerError> {
    fs::write(path, to_bytes(c)).map_err(|source| ContainerError::IoFailure {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<ModelContainer, ContainerError> {
    let bytes = fs::read(path).map_err(|source| ContainerError::IoFailure {
        path: path.display().to_string(),
        source,
    })?;
    from_bytes(&bytes)
}
