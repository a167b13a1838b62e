//! Private minibatch SGD with noisy batch-mean gradients.

use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::oracles::ProxyOracle;
use crate::privacy::PrivacyBudget;
use crate::ceil_tol;

use super::{positive, sample_with_replacement, Accounting, OracleKind, RunResult};

/// How the per-round noise level is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NoiseCalibration {
    /// `sigma = L max{1/sqrt d, 1/(mbar sqrt rho)}` as in the schedule.
    #[default]
    Schedule,
    /// `sigma = L sqrt(2/rho) / m`, which makes each round exactly
    /// `rho`-zCDP under sensitivity `2L/m`.
    ExactZcdp,
}

/// Derived schedule of private minibatch SGD.
#[derive(Clone, Debug, PartialEq)]
pub struct DpsgdConfig {
    pub alpha: f64,
    pub rho: f64,
    /// Batch cap; `f64::INFINITY` for none.
    pub mbar: f64,
    /// Radius `B` of the constraint ball.
    pub radius: f64,
    pub lipschitz: f64,
    pub d: usize,
    pub m: u64,
    pub sigma: f64,
    pub t: u64,
    pub eta: f64,
    /// `alpha >= B L / 3`: release the start point without any oracle call.
    pub trivial: bool,
    pub calibration: NoiseCalibration,
}

impl DpsgdConfig {
    /// `T m`, the number of true-oracle calls the run will make.
    pub fn planned_calls(&self) -> u64 {
        if self.trivial {
            0
        } else {
            self.t * self.m
        }
    }

    pub fn with_calibration(mut self, calibration: NoiseCalibration) -> Self {
        self.calibration = calibration;
        self.sigma = match calibration {
            NoiseCalibration::Schedule => schedule_sigma(self.lipschitz, self.d, self.mbar, self.rho),
            NoiseCalibration::ExactZcdp => self.lipschitz * (2.0 / self.rho).sqrt() / self.m as f64,
        };
        self
    }
}

fn schedule_sigma(lipschitz: f64, d: usize, mbar: f64, rho: f64) -> f64 {
    // 1/inf = 0
    lipschitz * (1.0 / (d as f64).sqrt()).max(1.0 / (mbar * rho.sqrt()))
}

/// Batch size, noise, round count and step size for accuracy `alpha`.
pub fn dpsgd_parameters(
    alpha: f64,
    rho: f64,
    mbar: f64,
    d: usize,
    radius: f64,
    lipschitz: f64,
) -> Result<DpsgdConfig> {
    positive("alpha", alpha)?;
    positive("rho", rho)?;
    positive("radius", radius)?;
    positive("lipschitz", lipschitz)?;
    if !(mbar >= 1.0) {
        return Err(Error::InvalidParameter(format!("batch cap must be >= 1 or infinite, got {mbar}")));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let df = d as f64;
    let trivial = alpha >= radius * lipschitz / 3.0;
    let m = ceil_tol((df / rho).sqrt().min(mbar)).max(1.0) as u64;
    let sigma = schedule_sigma(lipschitz, d, mbar, rho);
    let t = ceil_tol(radius * radius * lipschitz * lipschitz / (alpha * alpha) * 1.0f64.max(df / (mbar * mbar * rho)))
        .max(1.0) as u64;
    let eta = radius / (lipschitz * (t as f64).sqrt()) * 1.0f64.min(mbar * rho.sqrt() / df.sqrt());
    Ok(DpsgdConfig {
        alpha,
        rho,
        mbar,
        radius,
        lipschitz,
        d,
        m,
        sigma,
        t,
        eta,
        trivial,
        calibration: NoiseCalibration::Schedule,
    })
}

/// `B^2/(eta T) + eta L^2 + eta sigma^2 d`, the expected-error bound of the schedule.
pub fn convergence_bound(config: &DpsgdConfig) -> f64 {
    let (b, l, eta, t) = (config.radius, config.lipschitz, config.eta, config.t as f64);
    b * b / (eta * t) + eta * l * l + eta * config.sigma * config.sigma * config.d as f64
}

/// Runs the schedule from the centre of the constraint set and returns the
/// average of the queried iterates.
pub fn dpsgd_run<R: Rng + ?Sized>(
    oracle: &mut ProxyOracle<'_>,
    kind: OracleKind,
    config: &DpsgdConfig,
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
    let constraint = objective.constraint();
    let n = objective.num_losses();
    let start = constraint.anchor()?;
    let rounds_before = oracle.stats().round_zcdp.len();

    if config.trivial {
        return Ok(RunResult {
            suboptimality: objective.suboptimality(&start)?,
            point: start,
            stats: oracle.stats(),
            privacy: Accounting::Certified(PrivacyBudget::Zcdp { rho: 0.0 }),
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }

    let rule = kind.rule(config.sigma);
    let mut w = start;
    let mut sum = DenseVector::zeros(config.d);
    for _ in 0..config.t {
        let batch = sample_with_replacement(n, config.m as usize, rng)?;
        let reply = oracle.round_at(&w, &batch, &rule, rng)?;
        let g = reply.estimate()?;
        sum.axpy(1.0, &w);
        w.axpy(-config.eta, &g);
        w = constraint.project(&w)?;
        debug_assert!(constraint.contains(&w, 1e-9));
    }
    sum.scale(1.0 / config.t as f64);
    let point = sum;

    let stats = oracle.stats();
    let privacy = match kind {
        OracleKind::Private => {
            let rho: f64 = stats.round_zcdp[rounds_before..].iter().sum();
            Accounting::Certified(PrivacyBudget::Zcdp { rho })
        }
        _ => Accounting::None,
    };
    Ok(RunResult {
        suboptimality: objective.suboptimality(&point)?,
        point,
        stats,
        privacy,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{NonsmoothInstance, Objective, QuadraticTestLoss};
    use crate::rng::SplittableRng;

    #[test]
    fn schedule_examples() {
        let c = dpsgd_parameters(0.1, 1.0, f64::INFINITY, 100, 1.0, 1.0).unwrap();
        assert_eq!((c.m, c.t), (10, 100));
        assert!((c.sigma - 0.1).abs() < 1e-15);
        assert!((c.eta - 0.1).abs() < 1e-15);
        assert!(!c.trivial);

        let c = dpsgd_parameters(0.1, 1.0, 2.0, 100, 1.0, 1.0).unwrap();
        assert_eq!((c.m, c.t), (2, 2500));
        assert!((c.sigma - 0.5).abs() < 1e-15);
        assert!((c.eta - 0.004).abs() < 1e-15);

        let c = dpsgd_parameters(0.5, 1.0, f64::INFINITY, 100, 1.0, 1.0).unwrap();
        assert!(c.trivial);
        assert_eq!(c.planned_calls(), 0);
    }

    #[test]
    fn exact_calibration_hits_rho() {
        let c = dpsgd_parameters(0.1, 0.7, f64::INFINITY, 100, 1.0, 2.0)
            .unwrap()
            .with_calibration(NoiseCalibration::ExactZcdp);
        let sens = 2.0 * 2.0 / c.m as f64;
        let rho = sens * sens / (2.0 * c.sigma * c.sigma);
        assert!((rho - 0.7).abs() < 1e-12);
    }

    #[test]
    fn trivial_release_makes_no_calls() {
        let mut rng = SplittableRng::new(1, 0);
        let q = QuadraticTestLoss::sample_family(8, 20, &mut rng).unwrap();
        let c = dpsgd_parameters(0.5, 1.0, f64::INFINITY, 8, 1.0, 1.0).unwrap();
        let mut oracle = ProxyOracle::new(&q);
        let r = dpsgd_run(&mut oracle, OracleKind::Private, &c, &mut rng).unwrap();
        assert_eq!(r.stats.calls_total, 0);
        assert_eq!(r.point, DenseVector::zeros(8));
    }

    #[test]
    fn call_count_is_t_times_m() {
        let mut rng = SplittableRng::new(2, 0);
        let p = NonsmoothInstance::sample_with_offset(64, 0.2, 2.0, 10, &mut rng).unwrap();
        let c = dpsgd_parameters(0.2, 1.0, f64::INFINITY, 64, 1.0, 2.0).unwrap();
        let mut oracle = ProxyOracle::new(&p);
        let r = dpsgd_run(&mut oracle, OracleKind::Private, &c, &mut rng).unwrap();
        assert_eq!(r.stats.calls_total, c.t * c.m);
        assert_eq!(r.stats.unique_points, c.t);
        assert!(r.suboptimality.unwrap() >= -1e-9);
        match r.privacy {
            Accounting::Certified(PrivacyBudget::Zcdp { rho }) => {
                // literal schedule noise gives twice the nominal rho per round here
                let per_round = (2.0 * 2.0 / c.m as f64).powi(2) / (2.0 * c.sigma * c.sigma);
                assert!((rho - per_round * c.t as f64).abs() < 1e-9);
            }
            ref other => panic!("unexpected accounting {other:?}"),
        }
    }

    #[test]
    fn noiseless_full_batch_converges() {
        let mut rng = SplittableRng::new(3, 0);
        let q = QuadraticTestLoss::sample_family(10, 16, &mut rng).unwrap();
        let mut c = dpsgd_parameters(0.01, 1.0, f64::INFINITY, 10, 1.0, 1.0).unwrap();
        c.sigma = 0.0;
        let mut oracle = ProxyOracle::new(&q);
        let r = dpsgd_run(&mut oracle, OracleKind::Private, &c, &mut rng).unwrap();
        // averaged projected gradient method on a 1-Lipschitz loss over the unit ball
        let bound = 1.0 / (2.0 * c.eta * c.t as f64) + c.eta * q.lipschitz().powi(2) / 2.0;
        assert!(r.suboptimality.unwrap() <= bound);
    }

    #[test]
    fn deterministic_given_seed() {
        let run = || {
            let mut rng = SplittableRng::new(9, 4);
            let q = QuadraticTestLoss::sample_family(6, 12, &mut rng).unwrap();
            let c = dpsgd_parameters(0.2, 1.0, f64::INFINITY, 6, 1.0, 1.0).unwrap();
            let mut oracle = ProxyOracle::new(&q);
            let r = dpsgd_run(&mut oracle, OracleKind::Private, &c, &mut rng).unwrap();
            (r.point, r.suboptimality, r.stats)
        };
        assert_eq!(run(), run());
    }
}
