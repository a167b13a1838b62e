//! Phased SGD: rounds of one-pass SGD with geometrically shrinking steps,
//! each followed by Gaussian output perturbation.

use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::gaussian_vector;
use crate::oracles::{ProxyOracle, ResponseRule};
use crate::privacy::{amplify_with_replacement, compose, gaussian_zcdp, tcdp_to_approx, PrivacyBudget};
use crate::ceil_tol;

use super::{positive, sample_with_replacement, sgd_pass, Accounting, RunResult};

#[derive(Clone, Debug, PartialEq)]
pub struct PhasedSgdConfig {
    pub alpha: f64,
    pub delta: f64,
    pub radius: f64,
    pub lipschitz: f64,
    pub d: usize,
    pub n: usize,
    /// Number of rounds `R`.
    pub rounds: usize,
    /// `T = max{B L sqrt(d log(n/delta)) / alpha, B^2 L^2 / alpha^2}` (real valued).
    pub t_total: f64,
    /// `eta = (B/L) min{1/sqrt(d log(n/delta)), alpha/(B L)}`.
    pub eta: f64,
    /// `T_r = max(1, ceil(2^-r T))` for `r = 1..=R`.
    pub round_steps: Vec<u64>,
    /// `eta_r = 4^-r eta`.
    pub round_eta: Vec<f64>,
    /// `sigma_r = 4B / (4^r sqrt d)`.
    pub round_sigma: Vec<f64>,
}

impl PhasedSgdConfig {
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
        let bl = radius * lipschitz;
        let rounds = ceil_tol(0.5 * (bl / alpha).log2()).max(1.0) as usize;
        let dlog = d as f64 * (n as f64 / delta).ln();
        let t_total = (bl * dlog.sqrt() / alpha).max(bl * bl / (alpha * alpha));
        let eta = radius / lipschitz * (1.0 / dlog.sqrt()).min(alpha / bl);
        let sqrt_d = (d as f64).sqrt();
        let mut round_steps = Vec::with_capacity(rounds);
        let mut round_eta = Vec::with_capacity(rounds);
        let mut round_sigma = Vec::with_capacity(rounds);
        for r in 1..=rounds as i32 {
            round_steps.push(ceil_tol(t_total * 2f64.powi(-r)).max(1.0) as u64);
            round_eta.push(eta * 4f64.powi(-r));
            round_sigma.push(4.0 * radius / (4f64.powi(r) * sqrt_d));
        }
        Ok(Self {
            alpha,
            delta,
            radius,
            lipschitz,
            d,
            n,
            rounds,
            t_total,
            eta,
            round_steps,
            round_eta,
            round_sigma,
        })
    }

    pub fn planned_calls(&self) -> u64 {
        self.round_steps.iter().sum()
    }

    /// Privacy of the whole run: per round, Gaussian output perturbation of
    /// a `2 L eta_r`-sensitive average, converted at `delta/n`, amplified by
    /// sampling `T_r` of `n` with replacement; rounds compose.
    pub fn accountant(&self) -> Result<PrivacyBudget> {
        let n = self.n as u64;
        let inner_delta = self.delta / self.n as f64;
        let mut rounds = Vec::with_capacity(self.rounds);
        for r in 0..self.rounds {
            let sens = 2.0 * self.lipschitz * self.round_eta[r];
            let rho = gaussian_zcdp(sens, self.round_sigma[r])?.rho().unwrap_or(0.0);
            let (eps, delta) = tcdp_to_approx(rho, f64::INFINITY, inner_delta)?
                .eps_delta()
                .expect("approx");
            rounds.push(amplify_with_replacement(eps, delta, self.round_steps[r], n)?);
        }
        Ok(compose(&rounds)?)
    }
}

/// Runs the phased schedule from the centre of the constraint set.
///
/// Requires smooth losses with `beta <= 1/(2 eta)`. The returned point is the
/// last noisy iterate projected back onto the constraint set.
pub fn phased_sgd_run<R: Rng + ?Sized>(
    oracle: &mut ProxyOracle<'_>,
    config: &PhasedSgdConfig,
    rng: &mut R,
) -> Result<RunResult> {
    let started = Instant::now();
    let objective = oracle.objective();
    if objective.dim() != config.d {
        return Err(Error::DimensionMismatch {
            expected: config.d,
            found: objective.dim(),
        });
    }
    let limit = 1.0 / (2.0 * config.eta);
    match objective.smoothness() {
        Some(beta) if beta <= limit => {}
        Some(beta) => return Err(Error::SmoothnessViolated { beta, limit }),
        None => {
            return Err(Error::SmoothnessViolated {
                beta: f64::INFINITY,
                limit,
            })
        }
    }
    let constraint = objective.constraint();
    let n = objective.num_losses();
    let mut w = constraint.anchor()?;
    for r in 0..config.rounds {
        let indices = sample_with_replacement(n, config.round_steps[r] as usize, rng)?;
        let avg = sgd_pass(oracle, &indices, config.round_eta[r], &w, &ResponseRule::Identity, rng)?;
        let noise = gaussian_vector(config.d, config.round_sigma[r], rng)?;
        w = avg.add(&noise);
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
