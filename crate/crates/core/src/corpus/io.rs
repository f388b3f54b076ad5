//! Tab-separated corpus, annotation and rejection-log files.
//!
//! Corpus lines are `<id>\t<pos|neg|?>\t<text>`, annotation lines are
//! `<id>\t<label>\t<label>...` with labels `pos`, `neg` or `neu`, and
//! rejection-log lines are `<id>\t<reason>`.

use std::collections::HashSet;
use std::fmt::Write as _;

use super::{Label, LabeledReview, RawReview, Rejection};

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn parse_err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// One corpus line; `label` is `None` for `?`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRecord {
    pub id: String,
    pub label: Option<Label>,
    pub text: String,
}

impl CorpusRecord {
    pub fn labeled(&self) -> Option<LabeledReview> {
        self.label
            .map(|label| LabeledReview::new(self.id.clone(), self.text.clone(), label))
    }
}

fn lines(input: &str) -> impl Iterator<Item = (usize, &str)> {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

pub fn parse_corpus(input: &str) -> Result<Vec<CorpusRecord>, ParseError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (n, line) in lines(input) {
        let mut parts = line.splitn(3, '\t');
        let (Some(id), Some(label), Some(text)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(n, "expected `<id>\\t<label>\\t<text>`"));
        };
        if id.is_empty() {
            return Err(parse_err(n, "empty id"));
        }
        if !seen.insert(id.to_string()) {
            return Err(parse_err(n, format!("duplicate id `{id}`")));
        }
        if text.trim().is_empty() {
            return Err(parse_err(n, format!("review `{id}` has empty text")));
        }
        let label = match label {
            "?" => None,
            other => Some(other.parse::<Label>().map_err(|e| parse_err(n, e))?),
        };
        out.push(CorpusRecord {
            id: id.to_string(),
            label,
            text: text.to_string(),
        });
    }
    Ok(out)
}

/// Parses a corpus in which every record must carry a label.
pub fn parse_labeled(input: &str) -> Result<Vec<LabeledReview>, ParseError> {
    let records = parse_corpus(input)?;
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.labeled()
                .ok_or_else(|| parse_err(i + 1, format!("review `{}` is unlabeled", r.id)))
        })
        .collect()
}

pub fn format_corpus<'a>(records: impl IntoIterator<Item = &'a CorpusRecord>) -> String {
    let mut out = String::new();
    for r in records {
        let label = r.label.map_or("?", Label::as_str);
        let _ = writeln!(out, "{}\t{}\t{}", r.id, label, r.text);
    }
    out
}

pub fn format_labeled<'a>(reviews: impl IntoIterator<Item = &'a LabeledReview>) -> String {
    let mut out = String::new();
    for r in reviews {
        let _ = writeln!(out, "{}\t{}\t{}", r.id, r.label, r.text);
    }
    out
}

/// An annotator's vote as recorded in the annotation file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vote {
    Label(Label),
    Neutral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationRecord {
    pub id: String,
    pub votes: Vec<Vote>,
}

impl AnnotationRecord {
    pub fn has_neutral(&self) -> bool {
        self.votes.contains(&Vote::Neutral)
    }

    /// Binary labels, or `None` when any annotator voted neutral.
    pub fn binary(&self) -> Option<Vec<Label>> {
        self.votes
            .iter()
            .map(|v| match v {
                Vote::Label(l) => Some(*l),
                Vote::Neutral => None,
            })
            .collect()
    }
}

pub fn parse_annotations(input: &str) -> Result<Vec<AnnotationRecord>, ParseError> {
    let mut out = Vec::new();
    let mut width = None;
    for (n, line) in lines(input) {
        let mut parts = line.split('\t');
        let id = parts.next().unwrap_or_default();
        if id.is_empty() {
            return Err(parse_err(n, "empty id"));
        }
        let votes = parts
            .map(|v| match v {
                "neu" => Ok(Vote::Neutral),
                other => other.parse().map(Vote::Label).map_err(|e| parse_err(n, e)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if votes.is_empty() {
            return Err(parse_err(n, format!("no annotations for `{id}`")));
        }
        match width {
            None => width = Some(votes.len()),
            Some(w) if w != votes.len() => {
                return Err(parse_err(
                    n,
                    format!("expected {w} annotations, found {}", votes.len()),
                ))
            }
            _ => {}
        }
        out.push(AnnotationRecord {
            id: id.to_string(),
            votes,
        });
    }
    Ok(out)
}

pub fn format_rejections(rejections: &[Rejection]) -> String {
    let mut out = String::new();
    for r in rejections {
        let _ = writeln!(out, "{}\t{}", r.id, r.reason);
    }
    out
}

impl From<&CorpusRecord> for RawReview {
    fn from(r: &CorpusRecord) -> Self {
        RawReview::new(r.id.clone(), r.text.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RejectReason;

    #[test]
    fn corpus_lines() {
        let text = "a\tpos\tখুব ভালো খাবার\nb\t?\tদাম\tবেশি\n\n";
        let recs = parse_corpus(text).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].label, Some(Label::Positive));
        assert_eq!(recs[1].label, None);
        assert_eq!(recs[1].text, "দাম\tবেশি");
        assert_eq!(parse_corpus(&format_corpus(&recs)).unwrap(), recs);
    }

    #[test]
    fn corpus_errors_name_the_line() {
        let err = parse_corpus("a\tpos\tক খ গ\nb\tmaybe\tক").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("maybe"));
        assert!(parse_corpus("a\tpos\tx\na\tneg\ty").is_err());
        assert!(parse_labeled("a\t?\tক খ গ").is_err());
    }

    #[test]
    fn annotation_lines() {
        let recs = parse_annotations("a\tpos\tpos\tneg\nb\tneu\tneg\tneg\n").unwrap();
        assert_eq!(recs[0].binary().unwrap().len(), 3);
        assert!(recs[1].has_neutral());
        assert!(recs[1].binary().is_none());
        assert!(parse_annotations("a\tpos\tpos\tneg\nb\tneg\n").is_err());
    }

    #[test]
    fn rejection_log() {
        let log = format_rejections(&[Rejection {
            id: "x".into(),
            reason: RejectReason::TooShort,
        }]);
        assert_eq!(log, "x\ttoo-short\n");
    }
}
