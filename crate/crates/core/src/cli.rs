//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code: 0 on success, 1 on a usage
//! error, 2 on a data or validation error.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read as _, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baselines::{BaselineKind, BaselineParams, BaselinePipeline};
use crate::container::{load_model, save_model, ModelContainer};
use crate::corpus::io::{format_corpus, format_labeled, format_rejections, parse_annotations, parse_corpus, parse_labeled};
use crate::corpus::{
    average_pairwise_kappa, compute_stats, filter_reviews, merge_annotations, normalize_text, split_corpus, Label,
    LabeledReview, RawReview, RejectReason, Rejection, SplitSpec,
};
use crate::metrics::{confusion_and_prf, format_report, pr_ap, roc_auc};
use crate::nn::{predict, Hyperparameters};
use crate::synthetic::{noisy_records, SyntheticSpec};
use crate::textvec::{encode_text, tokenize, Vocabulary};
use crate::train::{encode_reviews, train_model_with, Example};
use crate::tune::{coordinate_search, ParamName, SearchSpace};

pub const SEED_ENV: &str = "SENT_SEED";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

fn data<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Data(msg.into()))
}

#[derive(Parser, Debug)]
#[command(name = "bnsent", version, about = "Bengali review sentiment: cleaning, BiLSTM training, baselines, evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Clean a raw corpus: drop duplicates, short and mixed-language reviews.
    Clean(CleanArgs),
    /// Per-class document, word, unique-word and sentence counts.
    Stats(StatsArgs),
    /// Seeded train/validation/test split.
    Split(SplitArgs),
    /// Train the BiLSTM classifier.
    Train(TrainArgs),
    /// Coordinate-wise hyperparameter search.
    Tune(TuneArgs),
    /// Evaluate a saved model on a labeled corpus.
    Eval(EvalArgs),
    /// Train and evaluate a TF-IDF baseline (lr, dt, rf, nb, svm).
    Baseline(BaselineArgs),
    /// Classify one review per input line.
    Predict(PredictArgs),
    /// Write a noisy synthetic raw corpus for trying the pipeline.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Random seed; falls back to SENT_SEED, then the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct CleanArgs {
    /// Raw corpus TSV (`id<TAB>pos|neg|?<TAB>text`).
    #[arg(long)]
    input: PathBuf,
    /// Cleaned corpus TSV to write.
    #[arg(long)]
    output: PathBuf,
    /// Annotation TSV (`id<TAB>label<TAB>label...`); majority vote sets the label.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Rejection log (`id<TAB>reason`).
    #[arg(long)]
    rejections: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    min_words: usize,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(long)]
    input: PathBuf,
    /// Directory receiving train.tsv, val.tsv and test.tsv.
    #[arg(long)]
    out_dir: PathBuf,
    /// Train, validation and test fractions.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.72, 0.18, 0.10])]
    ratios: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    val: Option<PathBuf>,
    /// Model container to write.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Per-epoch history CSV to write.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Build the vocabulary from this corpus instead of the training split.
    #[arg(long, value_name = "CORPUS")]
    whole_corpus_vocab: Option<PathBuf>,
    /// Also write the vocabulary TSV.
    #[arg(long)]
    vocab_out: Option<PathBuf>,
    /// Allow overlapping training and validation reviews.
    #[arg(long)]
    unsafe_same_split: bool,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args, Debug)]
struct TuneArgs {
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    val: Option<PathBuf>,
    /// Search trace CSV to write.
    #[arg(long)]
    trace: PathBuf,
    /// Winning configuration, in config-file format.
    #[arg(long)]
    best: PathBuf,
    /// Hyperparameters to search, in search order (default: all six).
    #[arg(long, value_delimiter = ',')]
    params: Vec<String>,
    /// Start from the configuration instead of the published initial values.
    #[arg(long)]
    from_config: bool,
    #[arg(long)]
    unsafe_same_split: bool,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Labeled corpus to evaluate on.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    /// ROC curve CSV (`x,y` = false positive rate, true positive rate).
    #[arg(long)]
    roc: Option<PathBuf>,
    /// PR curve CSV (`x,y` = recall, precision).
    #[arg(long)]
    pr: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    /// lr, dt, rf, nb or svm.
    kind: String,
    #[arg(long)]
    train: Option<PathBuf>,
    /// Labeled corpus to evaluate on.
    #[arg(long)]
    eval: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    roc: Option<PathBuf>,
    #[arg(long)]
    pr: Option<PathBuf>,
    /// Allow evaluating on reviews that were also trained on.
    #[arg(long)]
    unsafe_same_split: bool,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// One review per line; standard input when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    output: PathBuf,
    /// Number of clean reviews before noise records are added.
    #[arg(long, default_value_t = 400)]
    reviews: usize,
    #[arg(long)]
    seed: Option<u64>,
}

/// Everything a configuration file can set.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub hp: Hyperparameters,
    pub baseline: BaselineParams,
    pub paths: BTreeMap<String, PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            hp: Hyperparameters::default(),
            baseline: BaselineParams::default(),
            paths: BTreeMap::new(),
        }
    }
}

const PATH_KEYS: [&str; 6] = ["train", "val", "test", "model", "history", "eval"];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("bad value {value:?} for {key}: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("bad value {value:?} for {key}: expected true or false")),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let hp = &mut self.hp;
        let b = &mut self.baseline;
        match key {
            "embedding_dim" => hp.embedding_dim = parse_value(key, value)?,
            "seq_len" => hp.seq_len = parse_value(key, value)?,
            "hidden" => hp.hidden = parse_value(key, value)?,
            "dense1" => hp.dense1 = parse_value(key, value)?,
            "dense2" => hp.dense2 = parse_value(key, value)?,
            "dropout" => hp.dropout = parse_value(key, value)?,
            "batch_size" => hp.batch_size = parse_value(key, value)?,
            "learning_rate" => hp.learning_rate = parse_value(key, value)?,
            "epochs" => hp.epochs = parse_value(key, value)?,
            "optimizer" => hp.optimizer = parse_value(key, value)?,
            "threshold" => hp.threshold = parse_value(key, value)?,
            "hidden_variant" => hp.hidden_variant = parse_value(key, value)?,
            "seed" => hp.seed = parse_value(key, value)?,
            "vocab_size" => return Err("vocab_size is derived from the training data".into()),
            "linear_lambda" => b.linear_lambda = parse_value(key, value)?,
            "linear_epochs" => b.linear_epochs = parse_value(key, value)?,
            "linear_learning_rate" => b.linear_learning_rate = parse_value(key, value)?,
            "nb_alpha" => b.nb_alpha = parse_value(key, value)?,
            "max_depth" => b.max_depth = parse_value(key, value)?,
            "min_node_size" => b.min_node_size = parse_value(key, value)?,
            "trees" => b.trees = parse_value(key, value)?,
            "bootstrap" => b.bootstrap = parse_bool(key, value)?,
            "full_features" => b.full_features = parse_bool(key, value)?,
            k if PATH_KEYS.contains(&k) => {
                self.paths.insert(k.to_string(), PathBuf::from(value));
            }
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), String> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(format!("{origin}:{}: expected `key = value`", n + 1));
            };
            self.set(k.trim(), v.trim())
                .map_err(|e| format!("{origin}:{}: {e}", n + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        self.hp.validate().map_err(|e| e.to_string())?;
        let b = &self.baseline;
        if !(b.linear_lambda >= 0.0 && b.linear_lambda.is_finite()) {
            return Err(format!("linear_lambda {} must be ≥ 0", b.linear_lambda));
        }
        if !(b.linear_learning_rate > 0.0 && b.linear_learning_rate.is_finite()) {
            return Err(format!("linear_learning_rate {} must be > 0", b.linear_learning_rate));
        }
        if !(b.nb_alpha > 0.0 && b.nb_alpha.is_finite()) {
            return Err(format!("nb_alpha {} must be > 0", b.nb_alpha));
        }
        if b.trees == 0 {
            return Err("trees must be ≥ 1".into());
        }
        Ok(())
    }

    /// Hyperparameter lines in config-file format.
    pub fn hp_text(hp: &Hyperparameters) -> String {
        let mut out = String::new();
        let rows: [(&str, String); 13] = [
            ("embedding_dim", hp.embedding_dim.to_string()),
            ("seq_len", hp.seq_len.to_string()),
            ("hidden", hp.hidden.to_string()),
            ("dense1", hp.dense1.to_string()),
            ("dense2", hp.dense2.to_string()),
            ("dropout", hp.dropout.to_string()),
            ("batch_size", hp.batch_size.to_string()),
            ("learning_rate", hp.learning_rate.to_string()),
            ("epochs", hp.epochs.to_string()),
            ("optimizer", hp.optimizer.to_string()),
            ("threshold", hp.threshold.to_string()),
            ("hidden_variant", hp.hidden_variant.to_string()),
            ("seed", hp.seed.to_string()),
        ];
        for (k, v) in rows {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }
}

struct Env<'a> {
    var: &'a dyn Fn(&str) -> Option<String>,
}

fn resolve_config(args: &ConfigArgs, env: &Env) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(s) = (env.var)(SEED_ENV) {
        cfg.hp.seed = s
            .trim()
            .parse()
            .or_else(|_| data(format!("{SEED_ENV}={s:?} is not an unsigned integer")))?;
    }
    if let Some(path) = &args.config {
        let text = read_text(path)?;
        cfg.apply_text(&text, &path.display().to_string()).map_err(CliError::Data)?;
    }
    for kv in &args.set {
        let Some((k, v)) = kv.split_once('=') else {
            return Err(CliError::Usage(format!("--set {kv:?}: expected KEY=VALUE")));
        };
        cfg.set(k.trim(), v.trim())
            .map_err(|e| CliError::Usage(format!("--set {kv:?}: {e}")))?;
    }
    if let Some(seed) = args.seed {
        cfg.hp.seed = seed;
    }
    cfg.validate().map_err(CliError::Data)?;
    Ok(cfg)
}

fn pick_path(flag: &Option<PathBuf>, cfg: &RunConfig, key: &str) -> Result<PathBuf, CliError> {
    flag.clone()
        .or_else(|| cfg.paths.get(key).cloned())
        .ok_or_else(|| CliError::Usage(format!("missing --{key} (or `{key}` in the config file)")))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).or_else(|e| data(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).or_else(|e| data(format!("{}: {e}", path.display())))
}

fn read_labeled(path: &Path) -> Result<Vec<LabeledReview>, CliError> {
    let text = read_text(path)?;
    let reviews = parse_labeled(&text).or_else(|e| data(format!("{}: {e}", path.display())))?;
    if reviews.is_empty() {
        return data(format!("{}: no reviews", path.display()));
    }
    Ok(reviews)
}

fn load(path: &Path) -> Result<ModelContainer, CliError> {
    load_model(path).or_else(|e| data(format!("{}: {e}", path.display())))
}

fn save(c: &ModelContainer, path: &Path) -> Result<(), CliError> {
    save_model(c, path).or_else(|e| data(e.to_string()))
}

/// Refuses overlapping review ids between a fitting set and an evaluation
/// set unless explicitly allowed.
fn guard_disjoint(
    fit: &[LabeledReview],
    fit_path: &Path,
    eval: &[LabeledReview],
    eval_path: &Path,
    allow: bool,
) -> Result<(), CliError> {
    if allow {
        return Ok(());
    }
    let ids: HashSet<&str> = fit.iter().map(|r| r.id.as_str()).collect();
    if let Some(r) = eval.iter().find(|r| ids.contains(r.id.as_str())) {
        return data(format!(
            "review {} is in both {} and {}; pass --unsafe-same-split to allow this",
            r.id,
            fit_path.display(),
            eval_path.display()
        ));
    }
    Ok(())
}

/// Parses and executes `argv` (including the program name), reading the
/// environment for the seed fallback. Returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let var = |k: &str| std::env::var(k).ok();
    run_with(argv, &var, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// As [`run`] with an explicit environment lookup and output streams.
pub fn run_with<I, S>(
    argv: I,
    var: &dyn Fn(&str) -> Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let env = Env { var };
    match dispatch(cli.command, &env, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, env: &Env, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Clean(a) => clean(a, out),
        Command::Stats(a) => stats(a, out),
        Command::Split(a) => split(a, env, out),
        Command::Train(a) => train(a, env, out),
        Command::Tune(a) => tune(a, env, out),
        Command::Eval(a) => eval(a, out),
        Command::Baseline(a) => baseline(a, env, out),
        Command::Predict(a) => predict_cmd(a, out),
        Command::Synth(a) => synth(a, env, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .or_else(|e| data(format!("writing output: {e}")))
}

fn clean(a: CleanArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.min_words == 0 {
        return Err(CliError::Usage("--min-words must be at least 1".into()));
    }
    let text = read_text(&a.input)?;
    let records = parse_corpus(&text).or_else(|e| data(format!("{}: {e}", a.input.display())))?;
    let mut raws: Vec<RawReview> = Vec::with_capacity(records.len());
    let mut rejections: Vec<Rejection> = Vec::new();
    let mut kappa = None;

    let votes = match &a.annotations {
        None => None,
        Some(path) => {
            let t = read_text(path)?;
            let rows = parse_annotations(&t).or_else(|e| data(format!("{}: {e}", path.display())))?;
            let binary: Vec<Vec<Label>> = rows.iter().filter_map(|r| r.binary()).collect();
            if !binary.is_empty() && binary[0].len() >= 2 {
                kappa = Some(average_pairwise_kappa(&binary).or_else(|e| data(format!("{}: {e}", path.display())))?);
            }
            Some(rows.into_iter().map(|r| (r.id.clone(), r)).collect::<BTreeMap<_, _>>())
        }
    };

    let mut labels: BTreeMap<String, Label> = BTreeMap::new();
    for rec in &records {
        let label = match votes.as_ref().and_then(|v| v.get(&rec.id)) {
            Some(row) => match row.binary() {
                None => {
                    rejections.push(Rejection {
                        id: rec.id.clone(),
                        reason: RejectReason::Neutral,
                    });
                    continue;
                }
                Some(binary) => {
                    let raw = RawReview::from(rec).with_annotations(binary);
                    merge_annotations(&raw).or_else(|e| data(format!("annotations for {}: {e}", rec.id)))?
                }
            },
            None => match rec.label {
                Some(l) => l,
                None => return data(format!("review {} has no label and no annotations", rec.id)),
            },
        };
        labels.insert(rec.id.clone(), label);
        raws.push(RawReview::from(rec));
    }

    let (kept, mut rejected) = filter_reviews(&raws, a.min_words);
    rejections.append(&mut rejected);
    let cleaned: Vec<LabeledReview> = kept
        .into_iter()
        .map(|r| {
            let label = labels[&r.id];
            LabeledReview::new(r.id, r.text, label)
        })
        .collect();
    write_text(&a.output, &format_labeled(&cleaned))?;
    if let Some(p) = &a.rejections {
        write_text(p, &format_rejections(&rejections))?;
    }

    let mut summary = format!("kept\t{}\nrejected\t{}\n", cleaned.len(), rejections.len());
    for reason in [
        RejectReason::Duplicate,
        RejectReason::TooShort,
        RejectReason::MixedLanguage,
        RejectReason::Neutral,
    ] {
        let n = rejections.iter().filter(|r| r.reason == reason).count();
        writeln!(summary, "{}\t{n}", reason.as_str()).unwrap();
    }
    if let Some(k) = kappa {
        writeln!(summary, "kappa\t{k:.6}").unwrap();
    }
    emit(out, &summary)
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let corpus = read_labeled(&a.input)?;
    let s = compute_stats(&corpus);
    let mut report = String::from("class\tdocuments\twords\tunique_words\tsentences\n");
    for label in [Label::Positive, Label::Negative] {
        let c = s.class(label);
        writeln!(
            report,
            "{}\t{}\t{}\t{}\t{}",
            label, c.documents, c.words, c.unique_words, c.sentences
        )
        .unwrap();
    }
    if let Some(p) = &a.output {
        write_text(p, &report)?;
    }
    emit(out, &report)
}

fn env_seed(flag: Option<u64>, env: &Env) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match (env.var)(SEED_ENV) {
        None => Ok(0),
        Some(s) => s
            .trim()
            .parse()
            .or_else(|_| data(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
    }
}

fn split(a: SplitArgs, env: &Env, out: &mut dyn Write) -> Result<(), CliError> {
    let corpus = read_labeled(&a.input)?;
    let spec = SplitSpec {
        train_ratio: a.ratios[0],
        val_ratio: a.ratios[1],
        test_ratio: a.ratios[2],
        seed: env_seed(a.seed, env)?,
    };
    let parts = split_corpus(&corpus, &spec).or_else(|e| data(format!("{}: {e}", a.input.display())))?;
    fs::create_dir_all(&a.out_dir).or_else(|e| data(format!("{}: {e}", a.out_dir.display())))?;
    let mut summary = String::new();
    for (name, part) in [("train", &parts.train), ("val", &parts.val), ("test", &parts.test)] {
        write_text(&a.out_dir.join(format!("{name}.tsv")), &format_labeled(part.iter()))?;
        writeln!(summary, "{name}\t{}", part.len()).unwrap();
    }
    emit(out, &summary)
}

/// Vocabulary and encoded train/validation examples for the network.
fn prepare_network(
    train: &[LabeledReview],
    val: &[LabeledReview],
    vocab_corpus: Option<&[LabeledReview]>,
    hp: &mut Hyperparameters,
) -> (Vocabulary, Vec<Example>, Vec<Example>) {
    let source = vocab_corpus.unwrap_or(train);
    let vocab = Vocabulary::build(source.iter().map(|r| r.tokens()));
    hp.vocab_size = vocab.size();
    let tr = encode_reviews(train, &vocab, hp.seq_len);
    let va = encode_reviews(val, &vocab, hp.seq_len);
    (vocab, tr, va)
}

fn train(a: TrainArgs, env: &Env, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(&a.config, env)?;
    let train_path = pick_path(&a.train, &cfg, "train")?;
    let val_path = pick_path(&a.val, &cfg, "val")?;
    let model_path = pick_path(&a.model, &cfg, "model")?;
    let history_path = pick_path(&a.history, &cfg, "history")?;
    let train_set = read_labeled(&train_path)?;
    let val_set = read_labeled(&val_path)?;
    guard_disjoint(&train_set, &train_path, &val_set, &val_path, a.unsafe_same_split)?;
    let vocab_corpus = match &a.whole_corpus_vocab {
        Some(p) => Some(read_labeled(p)?),
        None => None,
    };

    let mut hp = cfg.hp.clone();
    let (vocab, tr, va) = prepare_network(&train_set, &val_set, vocab_corpus.as_deref(), &mut hp);
    let mut progress = String::new();
    let (params, history) = train_model_with(&tr, &va, &hp, |r| {
        writeln!(
            progress,
            "epoch {}\ttrain_loss {:.6}\ttrain_acc {:.6}\tval_loss {:.6}\tval_acc {:.6}",
            r.epoch, r.train_loss, r.train_accuracy, r.val_loss, r.val_accuracy
        )
        .unwrap();
    })
    .or_else(|e| data(format!("training on {}: {e}", train_path.display())))?;

    write_text(&history_path, &history.to_csv())?;
    if let Some(p) = &a.vocab_out {
        write_text(p, &vocab.to_tsv())?;
    }
    save(&ModelContainer::Network { hp, vocab, params }, &model_path)?;
    emit(out, &progress)
}

fn tune(a: TuneArgs, env: &Env, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(&a.config, env)?;
    let train_path = pick_path(&a.train, &cfg, "train")?;
    let val_path = pick_path(&a.val, &cfg, "val")?;
    let order: Vec<ParamName> = if a.params.is_empty() {
        ParamName::ALL.to_vec()
    } else {
        a.params
            .iter()
            .map(|p| p.parse::<ParamName>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Usage(e.to_string()))?
    };
    let train_set = read_labeled(&train_path)?;
    let val_set = read_labeled(&val_path)?;
    guard_disjoint(&train_set, &train_path, &val_set, &val_path, a.unsafe_same_split)?;

    let mut base = cfg.hp.clone();
    let (_, tr, va) = prepare_network(&train_set, &val_set, None, &mut base);
    let initial = if a.from_config {
        base
    } else {
        SearchSpace::standard_initial(&base)
    };
    let space = SearchSpace::standard();
    let (winner, trace) = coordinate_search(&space, &initial, &order, |hp: &Hyperparameters| {
        train_model_with(&tr, &va, hp, |_| {}).map(|(_, h)| h.last().map_or(0.0, |r| r.val_accuracy))
    })
    .map_err(|e| CliError::Data(e.to_string()))?;

    write_text(&a.trace, &trace.to_csv())?;
    write_text(&a.best, &RunConfig::hp_text(&winner))?;
    emit(out, &RunConfig::hp_text(&winner))
}

/// Label and ranking score for every review under a loaded model.
fn score_all(model: &ModelContainer, reviews: &[String]) -> Result<Vec<(Label, f64)>, CliError> {
    match model {
        ModelContainer::Network { hp, vocab, params } => reviews
            .iter()
            .map(|text| {
                let seq = encode_text(text, vocab, hp.seq_len);
                predict(params, hp, &seq).or_else(|e| data(e.to_string()))
            })
            .collect(),
        ModelContainer::Baseline { pipeline, .. } => Ok(reviews.iter().map(|text| pipeline.predict(&tokenize(text))).collect()),
    }
}

fn write_evaluation(
    labels: &[Label],
    scored: &[(Label, f64)],
    report: Option<&Path>,
    roc: Option<&Path>,
    pr: Option<&Path>,
    header: &str,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let preds: Vec<Label> = scored.iter().map(|s| s.0).collect();
    let scores: Vec<f64> = scored.iter().map(|s| s.1).collect();
    let prf = confusion_and_prf(labels, &preds).or_else(|e| data(e.to_string()))?;
    let roc_curve = roc_auc(&scores, labels).ok();
    let pr_curve = pr_ap(&scores, labels).ok();
    let text = format!(
        "{header}{}",
        format_report(&prf, roc_curve.as_ref(), pr_curve.as_ref())
    );
    for (path, curve, what) in [(roc, &roc_curve, "ROC"), (pr, &pr_curve, "PR")] {
        if let Some(p) = path {
            match curve {
                Some(c) => write_text(p, &c.to_csv())?,
                None => return data(format!("{what} curve undefined: the evaluation set lacks a class")),
            }
        }
    }
    if let Some(p) = report {
        write_text(p, &text)?;
    }
    emit(out, &text)
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load(&a.model)?;
    let reviews = read_labeled(&a.data)?;
    let texts: Vec<String> = reviews.iter().map(|r| r.text.clone()).collect();
    let labels: Vec<Label> = reviews.iter().map(|r| r.label).collect();
    let scored = score_all(&model, &texts)?;
    let header = format!("model\t{}\n", model.kind_name());
    write_evaluation(
        &labels,
        &scored,
        a.report.as_deref(),
        a.roc.as_deref(),
        a.pr.as_deref(),
        &header,
        out,
    )
}

fn baseline(a: BaselineArgs, env: &Env, out: &mut dyn Write) -> Result<(), CliError> {
    let kind: BaselineKind = a.kind.parse().map_err(|e: crate::baselines::BaselineError| CliError::Usage(e.to_string()))?;
    let cfg = resolve_config(&a.config, env)?;
    let train_path = pick_path(&a.train, &cfg, "train")?;
    let eval_path = pick_path(&a.eval, &cfg, "eval")?;
    let train_set = read_labeled(&train_path)?;
    let eval_set = read_labeled(&eval_path)?;
    guard_disjoint(&train_set, &train_path, &eval_set, &eval_path, a.unsafe_same_split)?;

    let docs: Vec<Vec<&str>> = train_set.iter().map(|r| r.tokens()).collect();
    let labels: Vec<Label> = train_set.iter().map(|r| r.label).collect();
    let pipeline = BaselinePipeline::fit(kind, &docs, &labels, &cfg.baseline, cfg.hp.seed)
        .or_else(|e| data(format!("{}: {e}", train_path.display())))?;
    let scored: Vec<(Label, f64)> = eval_set.iter().map(|r| pipeline.predict(&r.tokens())).collect();
    let container = ModelContainer::Baseline {
        params: cfg.baseline.clone(),
        pipeline,
    };
    if let Ok(p) = pick_path(&a.model, &cfg, "model") {
        save(&container, &p)?;
    }
    let eval_labels: Vec<Label> = eval_set.iter().map(|r| r.label).collect();
    let header = format!("model\t{kind}\n");
    write_evaluation(
        &eval_labels,
        &scored,
        a.report.as_deref(),
        a.roc.as_deref(),
        a.pr.as_deref(),
        &header,
        out,
    )
}

fn predict_cmd(a: PredictArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load(&a.model)?;
    let input = match &a.input {
        Some(p) => read_text(p)?,
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .or_else(|e| data(format!("standard input: {e}")))?;
            s
        }
    };
    let texts: Vec<String> = input.lines().map(normalize_text).collect();
    let scored = score_all(&model, &texts)?;
    let mut text = String::new();
    for (label, score) in scored {
        writeln!(text, "{}", format_prediction(label, score)).unwrap();
    }
    match &a.output {
        Some(p) => write_text(p, &text),
        None => emit(out, &text),
    }
}

fn synth(a: SynthArgs, env: &Env, out: &mut dyn Write) -> Result<(), CliError> {
    if a.reviews < 2 {
        return Err(CliError::Usage("--reviews must be at least 2".into()));
    }
    let spec = SyntheticSpec {
        reviews: a.reviews,
        seed: env_seed(a.seed, env)?,
        ..SyntheticSpec::default()
    };
    let records = noisy_records(&spec);
    write_text(&a.output, &format_corpus(&records))?;
    emit(out, &format!("records\t{}\n", records.len()))
}

/// `label<TAB>score` with six decimals.
pub fn format_prediction(label: Label, score: f64) -> String {
    format!("{label}\t{score:.6}")
}
