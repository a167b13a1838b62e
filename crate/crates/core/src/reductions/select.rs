use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

/// Exponential mechanism over scores (lower is better).
///
/// Samples `j` with probability proportional to
/// `exp(-eps (s_j - min s) / (2 sensitivity))`; subtracting the minimum
/// leaves the law unchanged and keeps the weights in `(0, 1]`.
/// `eps = inf` returns the first argmin.
pub fn exponential_select<R: Rng + ?Sized>(scores: &[f64], eps: f64, sensitivity: f64, rng: &mut R) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if !(sensitivity > 0.0) || sensitivity.is_infinite() {
        return Err(Error::InvalidParameter(format!(
            "score sensitivity must be positive and finite, got {sensitivity}"
        )));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be nonnegative, got {eps}")));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    if eps.is_infinite() {
        return Ok(scores.iter().position(|&s| s == min).expect("nonempty"));
    }
    let weights: Vec<f64> = scores
        .iter()
        .map(|&s| (-eps * (s - min) / (2.0 * sensitivity)).exp())
        .collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(dist.sample(rng))
}
