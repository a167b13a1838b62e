//! Wrappers that turn one private optimizer into another: boosting to high
//! probability, localized candidate generation, private selection among
//! candidates, bootstrap resampling, and rescaling to the unit problem.

mod boost;
mod resample;
mod rescale;
mod select;

pub use boost::{boost_erm, boost_runs, localized_erm, localized_radii, BoostConfig, Boosted, CandidateSet, Selection};
pub use resample::{bootstrap_indices, sco_to_erm, ResampledRun};
pub use rescale::{rescale_problem, RescaledObjective};
pub use select::exponential_select;

use crate::error::Result;
use crate::instances::Objective;
use crate::linalg::DenseVector;
use crate::privacy::PrivacyBudget;
use crate::rng::SplittableRng;

/// A (possibly private) optimizer run once on an objective.
pub trait ErmSolver: Sync {
    fn solve(&self, objective: &dyn Objective, rng: &mut SplittableRng) -> Result<DenseVector>;

    /// Privacy of one run, when the solver knows it.
    fn budget(&self) -> Option<PrivacyBudget> {
        None
    }
}

impl<F> ErmSolver for F
where
    F: Fn(&dyn Objective, &mut SplittableRng) -> Result<DenseVector> + Sync,
{
    fn solve(&self, objective: &dyn Objective, rng: &mut SplittableRng) -> Result<DenseVector> {
        self(objective, rng)
    }
}
