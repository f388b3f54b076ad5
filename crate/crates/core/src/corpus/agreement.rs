use super::{CorpusError, Label, RawReview};

/// Majority vote over an odd, non-empty set of annotator labels.
pub fn merge_annotations(review: &RawReview) -> Result<Label, CorpusError> {
    let n = review.annotations.len();
    if n == 0 {
        return Err(CorpusError::EmptyAnnotations);
    }
    if n % 2 == 0 {
        return Err(CorpusError::EvenAnnotatorCount(n));
    }
    let positives = review
        .annotations
        .iter()
        .filter(|&&l| l == Label::Positive)
        .count();
    Ok(Label::from_bool(2 * positives > n))
}

/// Cohen's kappa between two annotators over the same items.
///
/// Evaluated on integer counts, `(n·agree − Σ a_c·b_c) / (n² − Σ a_c·b_c)`,
/// which is the usual `(p_o − p_e) / (1 − p_e)` scaled by `n²`. When chance
/// agreement is total (both annotators used one and the same class
/// throughout) the result is 1.
pub fn cohens_kappa(a: &[Label], b: &[Label]) -> Result<f64, CorpusError> {
    if a.len() != b.len() {
        return Err(CorpusError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(CorpusError::EmptyInput);
    }
    let n = a.len() as u128;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as u128;
    let a_pos = a.iter().filter(|&&l| l == Label::Positive).count() as u128;
    let b_pos = b.iter().filter(|&&l| l == Label::Positive).count() as u128;
    let chance = a_pos * b_pos + (n - a_pos) * (n - b_pos);
    let denom = n * n - chance;
    if denom == 0 {
        return Ok(1.0);
    }
    let numer = (n * agree) as f64 - chance as f64;
    Ok(numer / denom as f64)
}

/// Mean Cohen's kappa over all annotator pairs. `matrix[i][j]` is annotator
/// `j`'s label for item `i`.
pub fn average_pairwise_kappa(matrix: &[Vec<Label>]) -> Result<f64, CorpusError> {
    if matrix.is_empty() {
        return Err(CorpusError::EmptyInput);
    }
    let k = matrix[0].len();
    if let Some(row) = matrix.iter().find(|r| r.len() != k) {
        return Err(CorpusError::LengthMismatch(k, row.len()));
    }
    if k < 2 {
        return Err(CorpusError::TooFewAnnotators(k));
    }
    let column = |j: usize| matrix.iter().map(|r| r[j]).collect::<Vec<_>>();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..k {
        let ci = column(i);
        for j in (i + 1)..k {
            sum += cohens_kappa(&ci, &column(j))?;
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}
