//! Views of an objective with a different constraint set or loss indexing.

use crate::error::{Error, Result};
use crate::linalg::{Constraint, DenseVector};

use super::{check_index, FirstOrderReply, Objective};

/// The same losses over a smaller constraint set. The minimizer is unknown
/// in general, so suboptimality is not reported.
pub struct Restricted<O> {
    inner: O,
    constraint: Constraint,
}

impl<O: Objective> Restricted<O> {
    pub fn new(inner: O, constraint: Constraint) -> Result<Self> {
        if constraint.dim() != inner.dim() {
            return Err(Error::DimensionMismatch {
                expected: inner.dim(),
                found: constraint.dim(),
            });
        }
        Ok(Self { inner, constraint })
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Objective> Objective for Restricted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn num_losses(&self) -> usize {
        self.inner.num_losses()
    }
    fn evaluate(&self, i: usize, w: &DenseVector) -> Result<FirstOrderReply> {
        self.inner.evaluate(i, w)
    }
    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }
    fn smoothness(&self) -> Option<f64> {
        self.inner.smoothness()
    }
    fn constraint(&self) -> Constraint {
        self.constraint.clone()
    }
    fn identical_losses(&self) -> bool {
        self.inner.identical_losses()
    }
    fn piece_count(&self) -> usize {
        self.inner.piece_count()
    }
    fn empirical_loss(&self, w: &DenseVector) -> Result<f64> {
        self.inner.empirical_loss(w)
    }
}

/// The dataset `(l_{j_1}, ..., l_{j_m})` for an index multiset `j`.
pub struct Resampled<O> {
    inner: O,
    indices: Vec<usize>,
}

impl<O: Objective> Resampled<O> {
    pub fn new(inner: O, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let n = inner.num_losses();
        for &j in &indices {
            check_index(j, n)?;
        }
        Ok(Self { inner, indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

impl<O: Objective> Objective for Resampled<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn num_losses(&self) -> usize {
        self.indices.len()
    }
    fn evaluate(&self, i: usize, w: &DenseVector) -> Result<FirstOrderReply> {
        check_index(i, self.indices.len())?;
        self.inner.evaluate(self.indices[i], w)
    }
    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }
    fn smoothness(&self) -> Option<f64> {
        self.inner.smoothness()
    }
    fn constraint(&self) -> Constraint {
        self.inner.constraint()
    }
    fn identical_losses(&self) -> bool {
        self.inner.identical_losses()
    }
    fn piece_count(&self) -> usize {
        self.inner.piece_count()
    }
}
