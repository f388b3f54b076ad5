use super::TrainError;

/// Probabilities are clipped to `[CLIP, 1 - CLIP]` before taking logs.
pub const CLIP: f64 = 1e-12;

/// Mean binary cross-entropy over a batch.
pub fn bce_loss(predictions: &[f64], targets: &[f64]) -> Result<f64, TrainError> {
    if predictions.len() != targets.len() {
        return Err(TrainError::LengthMismatch(predictions.len(), targets.len()));
    }
    if predictions.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let total: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(&y, &t)| {
            let y = y.clamp(CLIP, 1.0 - CLIP);
            t * y.ln() + (1.0 - t) * (1.0 - y).ln()
        })
        .sum();
    Ok(-total / predictions.len() as f64)
}
