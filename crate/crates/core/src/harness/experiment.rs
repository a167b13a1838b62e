use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algorithms::{
    dpsgd_parameters, dpsgd_run, phased_erm_run, phased_sgd_run, sgd_run, Accounting, NoiseCalibration, OracleKind,
    PhasedErmConfig, PhasedSgdConfig, ProjectedGradientSubsolver, RunResult,
};
use crate::error::{Error, Result};
use crate::instances::{read_instance, AnyInstance, NonsmoothInstance, QuadraticTestLoss, SmoothInstance};
use crate::oracles::{capped_count_limit, payload_bits, OracleStats, ProxyOracle};
use crate::privacy::{to_approx, PrivacyBudget};
use crate::rng::SplittableRng;

use super::config::{AlgorithmSpec, Calibration, ExperimentConfig, InstanceSpec, OracleName, OracleSpec};

/// One trial. Field order is the CSV column order; empty cells mean "not
/// applicable" (for example `rho` for phased SGD, `subopt` when the
/// minimizer is unknown).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub trial: u64,
    pub seed: u64,
    pub d: usize,
    pub n: usize,
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub mbar: Option<f64>,
    pub gamma: Option<u64>,
    pub algorithm: String,
    pub oracle: String,
    pub subopt: Option<f64>,
    pub calls_total: u64,
    pub unique_points: u64,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub wall_ms: f64,
    pub error: String,
    /// Summed `cnt_k` per problem vector (kept in memory only).
    #[serde(skip)]
    pub piece_hits: Vec<u64>,
    #[serde(skip)]
    pub regularizer_hits: u64,
    #[serde(skip)]
    pub generic_hits: u64,
    #[serde(skip)]
    pub capped_hits: Vec<f64>,
    #[serde(skip)]
    pub cap: Option<f64>,
    #[serde(skip)]
    pub round_batches: Vec<u64>,
}

impl RunRecord {
    pub fn is_error(&self) -> bool {
        !self.error.is_empty()
    }

    fn absorb(&mut self, stats: &OracleStats) {
        self.calls_total = stats.calls_total;
        self.unique_points = stats.unique_points;
        self.piece_hits = stats.problem_hits.clone();
        self.regularizer_hits = stats.regularizer_hits;
        self.generic_hits = stats.generic_hits;
        self.capped_hits = stats.capped_hits.clone();
        self.cap = stats.cap;
        self.round_batches = stats.batch_sizes.clone();
    }
}

#[derive(Serialize)]
struct HashView<'a> {
    seed: u64,
    instance: &'a InstanceSpec,
    algorithm: &'a AlgorithmSpec,
    oracle: &'a OracleSpec,
}

/// First 16 hex digits of the SHA-256 of the config's run-relevant fields.
/// `trials`, `out` and `timing` do not enter, so extending a sweep keeps
/// completed rows valid.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let view = HashView {
        seed: config.seed,
        instance: &config.instance,
        algorithm: &config.algorithm,
        oracle: &config.oracle,
    };
    let text = toml::to_string(&view).expect("config serializes");
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads a stored instance named by a `file` config.
pub fn load_instance_file(config: &ExperimentConfig) -> Result<Option<AnyInstance>> {
    match &config.instance {
        InstanceSpec::File { path } => {
            let f = File::open(path)
                .map_err(|e| Error::config(format!("cannot open instance {}: {e}", path.display())))?;
            Ok(Some(read_instance(BufReader::new(f))?))
        }
        _ => Ok(None),
    }
}

/// Samples the configured instance.
pub fn build_instance(spec: &InstanceSpec, rng: &mut SplittableRng) -> Result<AnyInstance> {
    Ok(match *spec {
        InstanceSpec::Nonsmooth { d, n, alpha, offset } => {
            AnyInstance::Nonsmooth(NonsmoothInstance::sample_with_offset(d, alpha, offset, n, rng)?)
        }
        InstanceSpec::Smooth {
            d,
            n,
            alpha,
            radius,
            lipschitz,
        } => AnyInstance::Smooth(SmoothInstance::sample(d, n, alpha, radius, lipschitz, rng)?),
        InstanceSpec::Quadratic { d, n } => AnyInstance::Quadratic(QuadraticTestLoss::sample_family(d, n, rng)?),
        InstanceSpec::File { .. } => return Err(Error::config("instance files are loaded, not sampled")),
    })
}

fn oracle_kind(spec: &OracleSpec, d: usize) -> OracleKind {
    match spec.kind {
        OracleName::Private => OracleKind::Private,
        OracleName::Identity => OracleKind::Identity,
        OracleName::Quantized => OracleKind::Quantized {
            bits: spec.bits,
            capacity: spec.capacity.unwrap_or_else(|| payload_bits(d, spec.bits)),
        },
    }
}

/// Runs trial `trial` of a single (non-sweep) config. Failures end up in the
/// `error` column.
pub fn run_trial(config: &ExperimentConfig, trial: u64, stored: Option<&AnyInstance>) -> RunRecord {
    let seed = config.seed.wrapping_add(trial);
    let mut record = RunRecord {
        config_hash: config_hash(config),
        trial,
        seed,
        algorithm: config.algorithm.name().to_string(),
        alpha: config.algorithm.alpha(),
        ..Default::default()
    };
    if let AlgorithmSpec::Dpsgd { rho, mbar, .. } = config.algorithm {
        record.rho = Some(rho);
        record.mbar = Some(mbar);
    }
    let started = Instant::now();
    let root = SplittableRng::new(seed, 0);
    let sampled;
    let instance = match stored {
        Some(i) => i,
        None => match build_instance(&config.instance, &mut root.split(1)) {
            Ok(i) => {
                sampled = i;
                &sampled
            }
            Err(e) => {
                record.error = e.to_string();
                return record;
            }
        },
    };
    let objective = instance.objective();
    record.d = objective.dim();
    record.n = objective.num_losses();
    let kind = oracle_kind(&config.oracle, record.d);
    record.oracle = match config.algorithm {
        AlgorithmSpec::Dpsgd { .. } => kind.name(),
        AlgorithmSpec::Sgd { .. } if kind == OracleKind::Private => OracleKind::Identity.name(),
        AlgorithmSpec::Sgd { .. } => kind.name(),
        _ => OracleKind::Identity.name(),
    }
    .to_string();
    if let OracleKind::Quantized { capacity, .. } = kind {
        record.gamma = Some(capacity);
    }

    let mut oracle = ProxyOracle::new(objective);
    if config.oracle.capped {
        if let (AnyInstance::Nonsmooth(p), AlgorithmSpec::Dpsgd { rho, .. }) = (instance, &config.algorithm) {
            oracle = oracle.with_cap(capped_count_limit(p.offset(), record.d, *rho));
        }
    }
    let mut rng = root.split(2);
    let outcome = execute(config, kind, &mut oracle, &mut rng);
    record.absorb(&oracle.stats());
    match outcome {
        Ok(result) => {
            record.subopt = result.suboptimality;
            let delta = match config.algorithm {
                AlgorithmSpec::Dpsgd { delta, .. }
                | AlgorithmSpec::PhasedSgd { delta, .. }
                | AlgorithmSpec::PhasedErm { delta, .. } => delta,
                AlgorithmSpec::Sgd { .. } => 0.0,
            };
            if let Accounting::Certified(budget) = result.privacy {
                match report_budget(budget, delta) {
                    Ok((e, d)) => {
                        record.eps = Some(e);
                        record.delta = Some(d);
                    }
                    Err(e) => record.error = e.to_string(),
                }
            }
        }
        Err(e) => record.error = e.to_string(),
    }
    if config.timing {
        record.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    }
    record
}

fn report_budget(budget: PrivacyBudget, delta: f64) -> Result<(f64, f64)> {
    let approx = match budget {
        PrivacyBudget::Zcdp { rho: 0.0 } => PrivacyBudget::ApproxDp { eps: 0.0, delta: 0.0 },
        b => to_approx(b, delta)?,
    };
    Ok(approx.eps_delta().expect("approximate DP"))
}

fn execute(
    config: &ExperimentConfig,
    kind: OracleKind,
    oracle: &mut ProxyOracle<'_>,
    rng: &mut SplittableRng,
) -> Result<RunResult> {
    let objective = oracle.objective();
    let (d, n) = (objective.dim(), objective.num_losses());
    let radius = objective.constraint().radius_bound();
    let lipschitz = objective.lipschitz();
    match config.algorithm {
        AlgorithmSpec::Dpsgd {
            alpha,
            rho,
            mbar,
            calibration,
            ..
        } => {
            let calibration = match calibration {
                Calibration::Schedule => NoiseCalibration::Schedule,
                Calibration::Exact => NoiseCalibration::ExactZcdp,
            };
            let params = dpsgd_parameters(alpha, rho, mbar, d, radius, lipschitz)?.with_calibration(calibration);
            dpsgd_run(oracle, kind, &params, rng)
        }
        AlgorithmSpec::PhasedSgd { alpha, delta } => {
            let params = PhasedSgdConfig::new(alpha, delta, radius, lipschitz, d, n)?;
            phased_sgd_run(oracle, &params, rng)
        }
        AlgorithmSpec::PhasedErm { alpha, delta } => {
            let params = PhasedErmConfig::new(alpha, delta, radius, lipschitz, d, n)?;
            phased_erm_run(oracle, &params, &ProjectedGradientSubsolver::default(), rng)
        }
        AlgorithmSpec::Sgd { steps, eta } => {
            let rule = match kind {
                OracleKind::Private => OracleKind::Identity.rule(0.0),
                k => k.rule(0.0),
            };
            let start = objective.constraint().anchor()?;
            let point = sgd_run(oracle, steps, eta, &start, &rule, rng)?;
            Ok(RunResult {
                suboptimality: objective.suboptimality(&point)?,
                point,
                stats: oracle.stats(),
                privacy: Accounting::None,
                wall_ms: 0.0,
            })
        }
    }
}

/// Runs every grid point and trial of a config in order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let mut out = Vec::new();
    for point in config.points()? {
        let stored = load_instance_file(&point)?;
        for trial in 0..point.trials {
            out.push(run_trial(&point, trial, stored.as_ref()));
        }
    }
    Ok(out)
}
