//! Laboratory for differentially private first-order convex optimization.
//!
//! The crate provides hard convex instances, a first-order oracle with
//! deterministic subgradient tie-breaking, proxy oracles (identity, Gaussian,
//! bit-limited), private optimizers with their parameter schedules, a privacy
//! accountant, reductions between empirical and population problems, and a
//! sweep harness that records oracle-call counts against accuracy.
//!
//! Constraint sets are Euclidean balls described by their radius `B`.

pub mod algorithms;
pub mod error;
pub mod harness;
pub mod instances;
pub mod linalg;
pub mod oracles;
pub mod privacy;
pub mod reductions;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::{BallConstraint, Constraint, DenseVector, OrthonormalBasis};
pub use privacy::PrivacyBudget;
pub use rng::SplittableRng;

/// Relative slack used when rounding real-valued schedule formulas to integers.
const ROUND_TOL: f64 = 1e-9;

/// `ceil(x)`, but values within a relative `1e-9` above an integer round down
/// to it, so that `sqrt(100)` style results are not bumped by float noise.
pub fn ceil_tol(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= ROUND_TOL * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// `floor(x)` with the same tolerance as [`ceil_tol`].
pub fn floor_tol(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= ROUND_TOL * r.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}
