//! Optimizers that talk to the objective only through a proxy oracle.

mod dpsgd;
mod phased_erm;
mod phased_sgd;
mod sgd;
mod subsolver;

pub use dpsgd::{convergence_bound, dpsgd_parameters, dpsgd_run, DpsgdConfig, NoiseCalibration};
pub use phased_erm::{phased_erm_run, PhasedErmConfig};
pub use phased_sgd::{phased_sgd_run, PhasedSgdConfig};
pub use sgd::{sgd_pass, sgd_run};
pub use subsolver::{
    strongly_convex_subsolver, ProjectedGradientSubsolver, RegularizedProblem, Subsolver, SubsolverOutput,
};

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::oracles::{OracleStats, ResponseRule};
use crate::privacy::PrivacyBudget;

/// What the accountant could say about a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Accounting {
    /// No privacy mechanism was involved.
    None,
    Certified(PrivacyBudget),
    /// The mechanism ran but its guarantee does not follow (reason attached).
    Uncertified(String),
}

impl Accounting {
    pub fn budget(&self) -> Option<PrivacyBudget> {
        match self {
            Accounting::Certified(b) => Some(*b),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub point: DenseVector,
    /// Empirical suboptimality when the minimizer is known.
    pub suboptimality: Option<f64>,
    pub stats: OracleStats,
    pub privacy: Accounting,
    pub wall_ms: f64,
}

/// Which proxy oracle an optimizer talks to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleKind {
    /// The algorithm's own private mechanism (Gaussian noise where it has one).
    Private,
    /// Exact batch-mean gradients.
    Identity,
    /// Batch-mean gradients quantized with `bits` level bits under a `capacity`-bit budget.
    Quantized { bits: u32, capacity: u64 },
}

impl OracleKind {
    pub(crate) fn rule(&self, sigma: f64) -> ResponseRule {
        match *self {
            OracleKind::Private => ResponseRule::Gaussian { sigma },
            OracleKind::Identity => ResponseRule::Identity,
            OracleKind::Quantized { bits, capacity } => ResponseRule::Quantized { bits, capacity },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OracleKind::Private => "gaussian",
            OracleKind::Identity => "identity",
            OracleKind::Quantized { .. } => "quantized",
        }
    }
}

/// `m` indices drawn uniformly with replacement from `0..n`.
pub fn sample_with_replacement<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidParameter("cannot sample from an empty dataset".into()));
    }
    Ok((0..m).map(|_| rng.random_range(0..n)).collect())
}

/// Checks that a schedule input is a positive finite real.
pub(crate) fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {x}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplittableRng;

    #[test]
    fn sampler_is_uniform_with_replacement() {
        let mut rng = SplittableRng::new(1, 0);
        let idx = sample_with_replacement(5, 50_000, &mut rng).unwrap();
        let mut counts = [0usize; 5];
        for i in idx {
            counts[i] += 1;
        }
        for c in counts {
            // binomial(50000, 0.2): sd ~ 89
            assert!((c as f64 - 10_000.0).abs() < 450.0);
        }
        assert!(sample_with_replacement(0, 3, &mut rng).is_err());
    }
}
