//! Projected single-sample SGD.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::oracles::{ProxyOracle, ResponseRule};

use super::sample_with_replacement;

/// One pass of projected SGD over `indices` (one oracle query per index),
/// starting at `start`. Returns the average of the queried iterates.
pub fn sgd_pass<R: Rng + ?Sized>(
    oracle: &mut ProxyOracle<'_>,
    indices: &[usize],
    eta: f64,
    start: &DenseVector,
    rule: &ResponseRule,
    rng: &mut R,
) -> Result<DenseVector> {
    if indices.is_empty() {
        return Err(Error::InvalidParameter("SGD needs at least one step".into()));
    }
    let constraint = oracle.objective().constraint();
    let mut w = start.clone();
    let mut sum = DenseVector::zeros(w.len());
    for &i in indices {
        let g = oracle.round_at(&w, &[i], rule, rng)?.estimate()?;
        sum.axpy(1.0, &w);
        w.axpy(-eta, &g);
        w = constraint.project(&w)?;
        debug_assert!(constraint.contains(&w, 1e-9));
    }
    sum.scale(1.0 / indices.len() as f64);
    Ok(sum)
}

/// `steps` steps of SGD with indices drawn uniformly from `0..n`.
pub fn sgd_run<R: Rng + ?Sized>(
    oracle: &mut ProxyOracle<'_>,
    steps: usize,
    eta: f64,
    start: &DenseVector,
    rule: &ResponseRule,
    rng: &mut R,
) -> Result<DenseVector> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    let n = oracle.objective().num_losses();
    let indices = sample_with_replacement(n, steps, rng)?;
    sgd_pass(oracle, &indices, eta, start, rule, rng)
}
