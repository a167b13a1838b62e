//! Phased ERM: a sequence of regularized subproblems with growing
//! regularization, each solved accurately and released with Gaussian noise.

use std::time::Instant;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::linalg::gaussian_vector;
use crate::oracles::ProxyOracle;
use crate::privacy::{compose, gaussian_zcdp, tcdp_to_approx, PrivacyBudget};
use crate::ceil_tol;

use super::{positive, Accounting, RegularizedProblem, RunResult, Subsolver};

#[derive(Clone, Debug, PartialEq)]
pub struct PhasedErmConfig {
    pub alpha: f64,
    pub delta: f64,
    pub radius: f64,
    pub lipschitz: f64,
    pub d: usize,
    pub n: usize,
    /// `R = ceil(log2(L B / alpha))`, at least 1.
    pub rounds: usize,
    /// `lambda_r = 2^r alpha / B^2` for `r = 1..=R`.
    pub round_lambda: Vec<f64>,
    /// `sigma_r = 4B / (2^r sqrt d)`.
    pub round_sigma: Vec<f64>,
    /// `min{L^2/(lambda_r n^2), 2^-r alpha}`.
    pub round_target: Vec<f64>,
}

impl PhasedErmConfig {
    pub fn new(alpha: f64, delta: f64, radius: f64, lipschitz: f64, d: usize, n: usize) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("radius", radius)?;
        positive("lipschitz", lipschitz)?;
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
        }
        if d == 0 || n == 0 {
            return Err(Error::InvalidParameter("d and n must be positive".into()));
        }
        let rounds = ceil_tol((lipschitz * radius / alpha).log2()).max(1.0) as usize;
        let nf = n as f64;
        let mut round_lambda = Vec::with_capacity(rounds);
        let mut round_sigma = Vec::with_capacity(rounds);
        let mut round_target = Vec::with_capacity(rounds);
        for r in 1..=rounds as i32 {
            let lambda = 2f64.powi(r) * alpha / (radius * radius);
            round_lambda.push(lambda);
            round_sigma.push(4.0 * radius / (2f64.powi(r) * (d as f64).sqrt()));
            round_target.push((lipschitz * lipschitz / (lambda * nf * nf)).min(2f64.powi(-r) * alpha));
        }
        Ok(Self {
            alpha,
            delta,
            radius,
            lipschitz,
            d,
            n,
            rounds,
            round_lambda,
            round_sigma,
            round_target,
        })
    }

    /// Rounds release a `2L/(lambda_r n)`-stable point with Gaussian noise;
    /// their zCDP composes and is converted at `delta`. Each round's
    /// subsolver may fail with probability `delta`, adding `R delta`.
    pub fn accountant(&self) -> Result<PrivacyBudget> {
        let mut per_round = Vec::with_capacity(self.rounds);
        for r in 0..self.rounds {
            let sens = 2.0 * self.lipschitz / (self.round_lambda[r] * self.n as f64);
            per_round.push(gaussian_zcdp(sens, self.round_sigma[r])?);
        }
        let rho = compose(&per_round)?.rho().unwrap_or(0.0);
        let (eps, delta) = tcdp_to_approx(rho, f64::INFINITY, self.delta)?
            .eps_delta()
            .expect("approx");
        Ok(PrivacyBudget::ApproxDp {
            eps,
            delta: (delta + self.rounds as f64 * self.delta).min(1.0),
        })
    }
}

/// Runs the rounds from the centre of the constraint set; the final noisy
/// point is projected back onto the constraint set.
pub fn phased_erm_run(
    oracle: &mut ProxyOracle<'_>,
    config: &PhasedErmConfig,
    subsolver: &dyn Subsolver,
    rng: &mut dyn RngCore,
) -> Result<RunResult> {
    let started = Instant::now();
    let objective = oracle.objective();
    if objective.dim() != config.d {
        return Err(Error::DimensionMismatch {
            expected: config.d,
            found: objective.dim(),
        });
    }
    let constraint = objective.constraint();
    let mut w = constraint.anchor()?;
    for r in 0..config.rounds {
        let problem = RegularizedProblem {
            lambda: config.round_lambda[r],
            center: w.clone(),
            target: config.round_target[r],
            start: w.clone(),
            failure_prob: config.delta,
        };
        let out = subsolver.solve(oracle, &problem, rng).map_err(|e| Error::Subsolver {
            round: r + 1,
            reason: e.to_string(),
        })?;
        let noise = gaussian_vector(config.d, config.round_sigma[r], rng)?;
        w = out.point.add(&noise);
    }
    let point = constraint.project(&w)?;
    let privacy = match config.accountant() {
        Ok(b) => Accounting::Certified(b),
        Err(e) => Accounting::Uncertified(e.to_string()),
    };
    Ok(RunResult {
        suboptimality: objective.suboptimality(&point)?,
        point,
        stats: oracle.stats(),
        privacy,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}
