//! Problem instances: finite sums of convex losses over a constraint ball.
//!
//! Loss indices are zero-based in code (`0..n`).

mod io;
mod nonsmooth;
mod quadratic;
mod smooth;
mod wrappers;

pub use io::{read_instance, write_instance, AnyInstance};
pub use nonsmooth::{min_dimension, problem_vector_count, NonsmoothInstance, DEFAULT_OFFSET};
pub use quadratic::QuadraticTestLoss;
pub use smooth::{rademacher_product_sample, SmoothInstance, SmoothSuboptimality};
pub use wrappers::{Resampled, Restricted};

use crate::error::Result;
use crate::linalg::{Constraint, DenseVector};

/// Which piece of a max-type loss produced an oracle reply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Piece {
    /// Problem vector `k` (zero-based).
    Problem(usize),
    /// The norm regularizer on the hidden subspace.
    Regularizer,
    /// A loss without piece structure.
    Generic,
}

/// Value and one subgradient of a single loss at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderReply {
    pub value: f64,
    pub gradient: DenseVector,
    pub piece: Piece,
}

/// A finite sum `(1/n) sum_i l_i(w)` of convex losses over a constraint set.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn num_losses(&self) -> usize;

    /// Loss value and subgradient of loss `i` at `w`.
    fn evaluate(&self, i: usize, w: &DenseVector) -> Result<FirstOrderReply>;

    /// Lipschitz constant of every loss on the constraint set.
    fn lipschitz(&self) -> f64;

    /// Smoothness constant, if the losses are smooth.
    fn smoothness(&self) -> Option<f64>;

    fn constraint(&self) -> Constraint;

    /// Minimizer of the empirical loss over the constraint set, when known in closed form.
    fn minimizer(&self) -> Option<DenseVector> {
        None
    }

    /// True when every loss index denotes the same function.
    fn identical_losses(&self) -> bool {
        false
    }

    /// Number of problem-vector pieces (zero for losses without piece structure).
    fn piece_count(&self) -> usize {
        0
    }

    fn loss(&self, i: usize, w: &DenseVector) -> Result<f64> {
        Ok(self.evaluate(i, w)?.value)
    }

    fn empirical_loss(&self, w: &DenseVector) -> Result<f64> {
        if self.identical_losses() {
            return self.loss(0, w);
        }
        let n = self.num_losses();
        let mut s = 0.0;
        for i in 0..n {
            s += self.loss(i, w)?;
        }
        Ok(s / n as f64)
    }

    /// `L(w) - L(w*)`, when the minimizer is known.
    fn suboptimality(&self, w: &DenseVector) -> Result<Option<f64>> {
        match self.minimizer() {
            Some(star) => Ok(Some(self.empirical_loss(w)? - self.empirical_loss(&star)?)),
            None => Ok(None),
        }
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn num_losses(&self) -> usize {
        (**self).num_losses()
    }
    fn evaluate(&self, i: usize, w: &DenseVector) -> Result<FirstOrderReply> {
        (**self).evaluate(i, w)
    }
    fn lipschitz(&self) -> f64 {
        (**self).lipschitz()
    }
    fn smoothness(&self) -> Option<f64> {
        (**self).smoothness()
    }
    fn constraint(&self) -> Constraint {
        (**self).constraint()
    }
    fn minimizer(&self) -> Option<DenseVector> {
        (**self).minimizer()
    }
    fn identical_losses(&self) -> bool {
        (**self).identical_losses()
    }
    fn piece_count(&self) -> usize {
        (**self).piece_count()
    }
    fn loss(&self, i: usize, w: &DenseVector) -> Result<f64> {
        (**self).loss(i, w)
    }
    fn empirical_loss(&self, w: &DenseVector) -> Result<f64> {
        (**self).empirical_loss(w)
    }
    fn suboptimality(&self, w: &DenseVector) -> Result<Option<f64>> {
        (**self).suboptimality(w)
    }
}

pub(crate) fn check_index(i: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(crate::Error::InvalidParameter(format!(
            "loss index {i} out of range for {n} losses"
        )));
    }
    Ok(())
}
