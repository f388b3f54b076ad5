//! Classification metrics with Positive as the reference class, ROC and
//! precision-recall curves.

use std::fmt::Write as _;

use crate::corpus::Label;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricsError {
    #[error("{0} labels but {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("no examples")]
    EmptyInput,
    #[error("ROC needs both classes")]
    SingleClass,
    #[error("PR curve needs at least one positive")]
    NoPositives,
    #[error("score {0} is not finite")]
    NonFiniteScore(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn from_pairs(labels: &[Label], predictions: &[Label]) -> Result<Self, MetricsError> {
        if labels.len() != predictions.len() {
            return Err(MetricsError::LengthMismatch(labels.len(), predictions.len()));
        }
        if labels.is_empty() {
            return Err(MetricsError::EmptyInput);
        }
        let mut m = ConfusionMatrix::default();
        for (&y, &p) in labels.iter().zip(predictions) {
            match (y, p) {
                (Label::Positive, Label::Positive) => m.tp += 1,
                (Label::Negative, Label::Positive) => m.fp += 1,
                (Label::Positive, Label::Negative) => m.fn_ += 1,
                (Label::Negative, Label::Negative) => m.tn += 1,
            }
        }
        Ok(m)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Scores derived from a confusion matrix. A metric whose denominator is
/// zero is reported as 0 and listed in the matching `*_undefined` flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
}

fn ratio(num: f64, den: f64) -> (f64, bool) {
    if den == 0.0 {
        (0.0, true)
    } else {
        (num / den, false)
    }
}

impl Prf {
    pub fn from_confusion(c: ConfusionMatrix) -> Self {
        let (tp, fp, fn_, tn) = (c.tp as f64, c.fp as f64, c.fn_ as f64, c.tn as f64);
        let (precision, precision_undefined) = ratio(tp, tp + fp);
        let (recall, recall_undefined) = ratio(tp, tp + fn_);
        let (f1, f1_undefined) = ratio(2.0 * precision * recall, precision + recall);
        Prf {
            confusion: c,
            accuracy: (tp + tn) / c.total() as f64,
            precision,
            recall,
            f1,
            precision_undefined,
            recall_undefined,
            f1_undefined,
        }
    }
}

pub fn confusion_and_prf(labels: &[Label], predictions: &[Label]) -> Result<Prf, MetricsError> {
    Ok(Prf::from_confusion(ConfusionMatrix::from_pairs(labels, predictions)?))
}

/// Curve points and the area under them.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveReport {
    pub points: Vec<(f64, f64)>,
    pub area: f64,
}

impl CurveReport {
    /// `x,y` header then one row per point, six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (x, y) in &self.points {
            writeln!(out, "{x:.6},{y:.6}").unwrap();
        }
        out
    }
}

/// Cumulative (positives, negatives) after each distinct score, highest
/// score first. Tied scores form one group.
fn sweep(scores: &[f64], labels: &[Label]) -> Result<Vec<(usize, usize)>, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch(labels.len(), scores.len()));
    }
    if scores.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if let Some(&s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore(s));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut out = Vec::new();
    let (mut pos, mut neg) = (0, 0);
    for (k, &i) in order.iter().enumerate() {
        match labels[i] {
            Label::Positive => pos += 1,
            Label::Negative => neg += 1,
        }
        let last_of_group = order.get(k + 1).map_or(true, |&j| scores[j] != scores[i]);
        if last_of_group {
            out.push((pos, neg));
        }
    }
    Ok(out)
}

/// ROC points `(fpr, tpr)` from `(0,0)` to `(1,1)`, trapezoidal area.
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> Result<CurveReport, MetricsError> {
    let groups = sweep(scores, labels)?;
    let &(p, n) = groups.last().unwrap();
    if p == 0 || n == 0 {
        return Err(MetricsError::SingleClass);
    }
    let mut points = vec![(0.0, 0.0)];
    points.extend(groups.iter().map(|&(tp, fp)| (fp as f64 / n as f64, tp as f64 / p as f64)));
    let area = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum();
    Ok(CurveReport { points, area })
}

/// PR points `(recall, precision)` starting at `(0, 1)`; area is average
/// precision with step interpolation.
pub fn pr_ap(scores: &[f64], labels: &[Label]) -> Result<CurveReport, MetricsError> {
    let groups = sweep(scores, labels)?;
    let p = groups.last().unwrap().0;
    if p == 0 {
        return Err(MetricsError::NoPositives);
    }
    let mut points = vec![(0.0, 1.0)];
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for &(tp, fp) in &groups {
        let recall = tp as f64 / p as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        points.push((recall, precision));
    }
    Ok(CurveReport { points, area })
}

/// Plain-text block with the confusion matrix and scores.
pub fn format_report(prf: &Prf, roc: Option<&CurveReport>, pr: Option<&CurveReport>) -> String {
    let c = prf.confusion;
    let flag = |undefined: bool| if undefined { " (undefined)" } else { "" };
    let mut out = String::new();
    writeln!(out, "examples\t{}", c.total()).unwrap();
    writeln!(out, "tp\t{}\nfp\t{}\nfn\t{}\ntn\t{}", c.tp, c.fp, c.fn_, c.tn).unwrap();
    writeln!(out, "accuracy\t{:.6}", prf.accuracy).unwrap();
    writeln!(out, "precision\t{:.6}{}", prf.precision, flag(prf.precision_undefined)).unwrap();
    writeln!(out, "recall\t{:.6}{}", prf.recall, flag(prf.recall_undefined)).unwrap();
    writeln!(out, "f1\t{:.6}{}", prf.f1, flag(prf.f1_undefined)).unwrap();
    if let Some(r) = roc {
        writeln!(out, "roc_auc\t{:.6}", r.area).unwrap();
    }
    if let Some(r) = pr {
        writeln!(out, "average_precision\t{:.6}", r.area).unwrap();
    }
    out
}
