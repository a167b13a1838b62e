use rand::seq::index;

use crate::error::{Error, Result};
use crate::instances::{Objective, Restricted};
use crate::linalg::{BallConstraint, Constraint, DenseVector};
use crate::privacy::{compose, to_approx, PrivacyBudget};
use crate::rng::SplittableRng;
use crate::ceil_tol;

use super::{exponential_select, ErmSolver};

/// Containment slack for candidate points.
const CONTAIN_TOL: f64 = 1e-9;

/// `K = max(1, ceil(log2 n))` independent runs.
pub fn boost_runs(n: usize) -> usize {
    ceil_tol((n.max(1) as f64).log2()).max(1.0) as usize
}

/// Radii `2^-r B` for `r = 0..=R` with `R = max(1, ceil(log2(n) / 2))`.
pub fn localized_radii(n: usize, radius: f64) -> Vec<f64> {
    let rounds = ceil_tol(0.5 * (n.max(1) as f64).log2()).max(1.0) as i32;
    (0..=rounds).map(|r| radius * 2f64.powi(-r)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoostConfig {
    /// Independent solver runs `K`.
    pub runs: usize,
    /// Target accuracy; score minibatches hold `ceil(1/alpha^2)` losses.
    pub alpha: f64,
    /// Per-run privacy of the solver, also used for the selection step.
    pub eps: f64,
    pub delta: f64,
}

impl BoostConfig {
    pub fn new(n: usize, alpha: f64, eps: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(eps >= 0.0) || !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("invalid budget ({eps}, {delta})")));
        }
        Ok(Self {
            runs: boost_runs(n),
            alpha,
            eps,
            delta,
        })
    }

    /// Score minibatch size, clamped to `n`.
    pub fn score_batch(&self, n: usize) -> usize {
        let want = ceil_tol(1.0 / (self.alpha * self.alpha)).max(1.0);
        if want > n as f64 {
            log::warn!("score minibatch of {want} losses exceeds n = {n}; using all {n}");
            n
        } else {
            want as usize
        }
    }
}

/// Candidate points with their minibatch loss estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    pub points: Vec<DenseVector>,
    pub scores: Vec<f64>,
    /// Minibatch size behind every score.
    pub batch: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub point: DenseVector,
    pub index: usize,
    pub candidates: CandidateSet,
    pub privacy: PrivacyBudget,
    /// Loss evaluations spent on scores.
    pub score_calls: u64,
}

/// Scores each candidate on its own minibatch drawn without replacement.
fn score(
    objective: &dyn Objective,
    points: Vec<DenseVector>,
    batch: usize,
    rng: &mut SplittableRng,
) -> Result<(CandidateSet, u64)> {
    let n = objective.num_losses();
    let mut scores = Vec::with_capacity(points.len());
    for u in &points {
        let mut s = 0.0;
        for i in index::sample(rng, n, batch) {
            s += objective.loss(i, u)?;
        }
        scores.push(s / batch as f64);
    }
    let calls = (points.len() * batch) as u64;
    Ok((CandidateSet { points, scores, batch }, calls))
}

/// Selects among scored candidates. One loss changes a score by at most its
/// range over the feasible ball, `2 B L`, divided by the batch size.
fn select(
    objective: &dyn Objective,
    points: Vec<DenseVector>,
    config: &BoostConfig,
    privacy: PrivacyBudget,
    rng: &mut SplittableRng,
) -> Result<Selection> {
    let batch = config.score_batch(objective.num_losses());
    let (candidates, score_calls) = score(objective, points, batch, rng)?;
    let range = 2.0 * objective.constraint().radius_bound() * objective.lipschitz();
    let sensitivity = range / batch as f64;
    let index = if sensitivity > 0.0 {
        exponential_select(&candidates.scores, config.eps, sensitivity, rng)?
    } else {
        0
    };
    Ok(Selection {
        point: candidates.points[index].clone(),
        index,
        candidates,
        privacy,
        score_calls,
    })
}

fn check_inside(constraint: &Constraint, w: &DenseVector, run: usize) -> Result<()> {
    if !constraint.contains(w, CONTAIN_TOL) {
        return Err(Error::InvalidParameter(format!(
            "candidate {run} lies outside the constraint set"
        )));
    }
    Ok(())
}

/// Runs the solver `K` times and privately picks the run with the lowest
/// estimated loss. Privacy `((K+1) eps, K delta)`.
pub fn boost_erm(
    solver: &dyn ErmSolver,
    objective: &dyn Objective,
    config: &BoostConfig,
    rng: &mut SplittableRng,
) -> Result<Selection> {
    if config.runs == 0 {
        return Err(Error::InvalidParameter("boosting needs at least one run".into()));
    }
    let constraint = objective.constraint();
    let mut points = Vec::with_capacity(config.runs);
    for j in 0..config.runs {
        let u = solver.solve(objective, &mut rng.split(j as u64))?;
        check_inside(&constraint, &u, j)?;
        points.push(u);
    }
    let k = config.runs as f64;
    let privacy = PrivacyBudget::ApproxDp {
        eps: (k + 1.0) * config.eps,
        delta: (k * config.delta).min(1.0),
    };
    select(objective, points, config, privacy, &mut rng.split(config.runs as u64))
}

/// [`boost_erm`] packaged as a solver.
pub struct Boosted<'a> {
    pub solver: &'a dyn ErmSolver,
    pub config: BoostConfig,
}

impl ErmSolver for Boosted<'_> {
    fn solve(&self, objective: &dyn Objective, rng: &mut SplittableRng) -> Result<DenseVector> {
        Ok(boost_erm(self.solver, objective, &self.config, rng)?.point)
    }

    fn budget(&self) -> Option<PrivacyBudget> {
        let k = self.config.runs as f64;
        Some(PrivacyBudget::ApproxDp {
            eps: (k + 1.0) * self.config.eps,
            delta: (k * self.config.delta).min(1.0),
        })
    }
}

/// One candidate per localized set `W ∩ {||w - center|| <= 2^-r B}`, then the
/// same private selection as [`boost_erm`].
///
/// Each run is charged the solver's own budget when it reports one, else
/// `(eps, delta)`; selection adds `eps`.
pub fn localized_erm(
    solver: &dyn ErmSolver,
    objective: &dyn Objective,
    center: &DenseVector,
    config: &BoostConfig,
    rng: &mut SplittableRng,
) -> Result<Selection> {
    let Constraint::Ball(base) = objective.constraint() else {
        return Err(Error::InvalidParameter("localization needs a ball constraint".into()));
    };
    if !base.contains(center, CONTAIN_TOL) {
        return Err(Error::InvalidParameter("localization centre lies outside the constraint set".into()));
    }
    let radii = localized_radii(objective.num_losses(), base.radius());
    let mut points = Vec::with_capacity(radii.len());
    for (r, &radius) in radii.iter().enumerate() {
        let local = Constraint::Intersection(base.clone(), BallConstraint::new(center.clone(), radius)?);
        let restricted = Restricted::new(objective, local.clone())?;
        let w = solver.solve(&restricted, &mut rng.split(r as u64))?;
        check_inside(&local, &w, r)?;
        points.push(w);
    }
    let per_run = match solver.budget() {
        Some(b) => to_approx(b, config.delta)?,
        None => PrivacyBudget::ApproxDp {
            eps: config.eps,
            delta: config.delta,
        },
    };
    let mut parts = vec![per_run; radii.len()];
    parts.push(PrivacyBudget::ApproxDp {
        eps: config.eps,
        delta: 0.0,
    });
    let privacy = compose(&parts)?;
    select(objective, points, config, privacy, &mut rng.split(radii.len() as u64))
}
