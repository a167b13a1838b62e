use rand::Rng;

use crate::algorithms::sample_with_replacement;
use crate::error::{Error, Result};
use crate::instances::{Objective, Resampled};
use crate::linalg::DenseVector;
use crate::privacy::{amplify_with_replacement, PrivacyBudget, PrivacyError};
use crate::rng::SplittableRng;

use super::ErmSolver;

/// Output of [`sco_to_erm`].
#[derive(Clone, Debug, PartialEq)]
pub struct ResampledRun {
    pub point: DenseVector,
    /// The bootstrap multiset handed to the solver.
    pub indices: Vec<usize>,
    pub privacy: PrivacyBudget,
}

/// `n` indices drawn uniformly with replacement from `0..n`.
pub fn bootstrap_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<usize>> {
    sample_with_replacement(n, n, rng)
}

/// Runs an `(eps, delta)`-DP population solver on a bootstrap resample of
/// the dataset. Needs `eps <= 1/6`; the result is
/// `(6 eps, 4 e^{6 eps} delta)`-DP.
pub fn sco_to_erm(
    solver: &dyn ErmSolver,
    objective: &dyn Objective,
    eps: f64,
    delta: f64,
    rng: &mut SplittableRng,
) -> Result<ResampledRun> {
    if !(eps <= 1.0 / 6.0) {
        return Err(Error::Privacy(PrivacyError::Precondition(format!(
            "resampling needs eps <= 1/6, got {eps}"
        ))));
    }
    let n = objective.num_losses() as u64;
    let privacy = amplify_with_replacement(eps, delta, n, n)?;
    let indices = bootstrap_indices(objective.num_losses(), &mut rng.split(0))?;
    let data = Resampled::new(objective, indices.clone())?;
    let point = solver.solve(&data, &mut rng.split(1))?;
    Ok(ResampledRun { point, indices, privacy })
}

#[cfg(test)]
mod tests {
    use std::sync::Mutex;

    use super::*;
    use crate::instances::{FirstOrderReply, QuadraticTestLoss};

    fn family(n: usize) -> QuadraticTestLoss {
        QuadraticTestLoss::sample_family(3, n, &mut SplittableRng::new(1, 0)).unwrap()
    }

    #[test]
    fn accountant_at_one_sixth() {
        let q = family(20);
        let ignore = |o: &dyn Objective, _: &mut SplittableRng| o.constraint().anchor();
        let run = sco_to_erm(&ignore, &q, 1.0 / 6.0, 1e-6, &mut SplittableRng::new(0, 0)).unwrap();
        let (eps, delta) = run.privacy.eps_delta().unwrap();
        assert!((eps - 1.0).abs() < 1e-12);
        assert!((delta - 4.0 * std::f64::consts::E * 1e-6).abs() < 1e-18);
        assert_eq!(run.point, DenseVector::zeros(3));
        assert!(sco_to_erm(&ignore, &q, 0.2, 1e-6, &mut SplittableRng::new(0, 0)).is_err());
    }

    #[test]
    fn solver_sees_only_the_resample() {
        let q = family(30);
        let touched = Mutex::new(Vec::new());
        let probe = |o: &dyn Objective, _: &mut SplittableRng| -> Result<DenseVector> {
            let w = DenseVector::zeros(3);
            for i in 0..o.num_losses() {
                let r: FirstOrderReply = o.evaluate(i, &w)?;
                touched.lock().unwrap().push(r.value);
            }
            Ok(w)
        };
        let run = sco_to_erm(&probe, &q, 0.1, 0.0, &mut SplittableRng::new(3, 0)).unwrap();
        let w = DenseVector::zeros(3);
        let expected: Vec<f64> = run.indices.iter().map(|&j| q.loss(j, &w).unwrap()).collect();
        assert_eq!(*touched.lock().unwrap(), expected);
    }

    #[test]
    fn multiplicities_binomial() {
        // multiplicity of index 0 over many resamples vs Binomial(n, 1/n)
        let n = 10;
        let reps = 10_000;
        let mut rng = SplittableRng::new(4, 0);
        let mut hist = [0u64; 4];
        for _ in 0..reps {
            let c = bootstrap_indices(n, &mut rng).unwrap().iter().filter(|&&j| j == 0).count();
            hist[c.min(3)] += 1;
        }
        let p = 1.0 / n as f64;
        let binom = |k: i32| {
            let choose = (0..k).fold(1.0, |acc, i| acc * (n as f64 - i as f64) / (i as f64 + 1.0));
            choose * p.powi(k) * (1.0 - p).powi(n as i32 - k)
        };
        let probs = [binom(0), binom(1), binom(2), 1.0 - binom(0) - binom(1) - binom(2)];
        let chi: f64 = hist
            .iter()
            .zip(probs)
            .map(|(&c, q)| (c as f64 - q * reps as f64).powi(2) / (q * reps as f64))
            .sum();
        // 3 degrees of freedom, 0.999 quantile
        assert!(chi < 16.27, "chi2 {chi}, {hist:?}");
    }
}
