//! Experiment configuration files.
//!
//! A config is a TOML document. Top-level keys: `seed`, `trials` (default
//! 20), `out`, `timing` (default false). Sections:
//!
//! ```toml
//! [instance]
//! family = "nonsmooth"        # nonsmooth | smooth | quadratic | file
//! d = 256
//! alpha = 0.2
//! offset = 2.0                # nonsmooth only, default 480
//!
//! [algorithm]
//! name = "dpsgd"              # dpsgd | phased-sgd | phased-erm | sgd
//! alpha = 0.2
//! rho = 1.0
//! mbar = inf                  # default inf
//! calibration = "schedule"    # schedule | exact
//!
//! [oracle]
//! kind = "private"            # private | identity | quantized
//! bits = 2                    # quantized level bits
//! capacity = 1024             # quantized message budget in bits
//!
//! [sweep]
//! mode = "cross"              # cross | paired
//! d = [64, 256, 1024]
//! ```
//!
//! Swept axes: `d`, `alpha`, `rho`, `mbar`, `gamma` (quantized capacity).
//! `alpha` sets both the instance target and the algorithm accuracy.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{min_dimension, problem_vector_count, DEFAULT_OFFSET};
use crate::oracles::payload_bits;

fn default_trials() -> u64 {
    20
}
fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}
fn infinite() -> f64 {
    f64::INFINITY
}
fn default_offset() -> f64 {
    DEFAULT_OFFSET
}
fn default_delta() -> f64 {
    1e-6
}
fn default_bits() -> u32 {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Record wall-clock times; off by default so output files are reproducible.
    #[serde(default)]
    pub timing: bool,
    pub instance: InstanceSpec,
    pub algorithm: AlgorithmSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceSpec {
    Nonsmooth {
        d: usize,
        #[serde(default = "one")]
        n: usize,
        alpha: f64,
        #[serde(default = "default_offset")]
        offset: f64,
    },
    Smooth {
        d: usize,
        n: usize,
        alpha: f64,
        #[serde(default = "unit")]
        radius: f64,
        #[serde(default = "unit")]
        lipschitz: f64,
    },
    Quadratic {
        d: usize,
        n: usize,
    },
    File {
        path: PathBuf,
    },
}

impl InstanceSpec {
    pub fn family(&self) -> &'static str {
        match self {
            InstanceSpec::Nonsmooth { .. } => "nonsmooth",
            InstanceSpec::Smooth { .. } => "smooth",
            InstanceSpec::Quadratic { .. } => "quadratic",
            InstanceSpec::File { .. } => "file",
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match *self {
            InstanceSpec::Nonsmooth { d, .. } | InstanceSpec::Smooth { d, .. } | InstanceSpec::Quadratic { d, .. } => {
                Some(d)
            }
            InstanceSpec::File { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Calibration {
    #[default]
    Schedule,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    Dpsgd {
        alpha: f64,
        rho: f64,
        #[serde(default = "infinite")]
        mbar: f64,
        #[serde(default)]
        calibration: Calibration,
        /// `delta` at which the zCDP guarantee is reported as `(eps, delta)`.
        #[serde(default = "default_delta")]
        delta: f64,
    },
    PhasedSgd {
        alpha: f64,
        #[serde(default = "default_delta")]
        delta: f64,
    },
    PhasedErm {
        alpha: f64,
        #[serde(default = "default_delta")]
        delta: f64,
    },
    Sgd {
        steps: usize,
        eta: f64,
    },
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::Dpsgd { .. } => "dpsgd",
            AlgorithmSpec::PhasedSgd { .. } => "phased-sgd",
            AlgorithmSpec::PhasedErm { .. } => "phased-erm",
            AlgorithmSpec::Sgd { .. } => "sgd",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            AlgorithmSpec::Dpsgd { alpha, .. }
            | AlgorithmSpec::PhasedSgd { alpha, .. }
            | AlgorithmSpec::PhasedErm { alpha, .. } => Some(alpha),
            AlgorithmSpec::Sgd { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleName {
    /// The algorithm's own mechanism (Gaussian noise for DP-SGD).
    #[default]
    Private,
    Identity,
    Quantized,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default)]
    pub kind: OracleName,
    #[serde(default = "default_bits")]
    pub bits: u32,
    /// Message budget `Gamma` in bits; defaults to the exact payload length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u64>,
    /// Apply the per-round cap `sqrt(3 c d / rho)` to the recorded piece counts.
    #[serde(default)]
    pub capped: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    #[default]
    Cross,
    Paired,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub mode: SweepMode,
    #[serde(default)]
    pub d: Vec<usize>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub rho: Vec<f64>,
    #[serde(default)]
    pub mbar: Vec<f64>,
    #[serde(default)]
    pub gamma: Vec<u64>,
}

/// One coordinate of a grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Axis {
    D(usize),
    Alpha(f64),
    Rho(f64),
    Mbar(f64),
    Gamma(u64),
}

impl SweepGrid {
    fn axes(&self) -> Vec<Vec<Axis>> {
        let mut axes = Vec::new();
        let mut push = |v: Vec<Axis>| {
            if !v.is_empty() {
                axes.push(v)
            }
        };
        push(self.d.iter().map(|&x| Axis::D(x)).collect());
        push(self.alpha.iter().map(|&x| Axis::Alpha(x)).collect());
        push(self.rho.iter().map(|&x| Axis::Rho(x)).collect());
        push(self.mbar.iter().map(|&x| Axis::Mbar(x)).collect());
        push(self.gamma.iter().map(|&x| Axis::Gamma(x)).collect());
        axes
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        let axes = self.axes();
        match (axes.is_empty(), self.mode) {
            (true, _) => 0,
            (false, SweepMode::Cross) => axes.iter().map(Vec::len).product(),
            (false, SweepMode::Paired) => axes[0].len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The base config at every grid point (without its `sweep` section).
    pub fn expand(&self, base: &ExperimentConfig) -> Result<Vec<ExperimentConfig>> {
        let axes = self.axes();
        if axes.is_empty() {
            return Err(Error::config("sweep grid is empty"));
        }
        let points: Vec<Vec<Axis>> = match self.mode {
            SweepMode::Cross => axes.iter().fold(vec![Vec::new()], |acc, axis| {
                acc.iter()
                    .flat_map(|p| {
                        axis.iter().map(move |a| {
                            let mut q = p.clone();
                            q.push(*a);
                            q
                        })
                    })
                    .collect()
            }),
            SweepMode::Paired => {
                let len = axes[0].len();
                if axes.iter().any(|a| a.len() != len) {
                    return Err(Error::config("paired sweep axes must have equal lengths"));
                }
                (0..len).map(|i| axes.iter().map(|a| a[i]).collect()).collect()
            }
        };
        points
            .into_iter()
            .map(|p| {
                let mut c = base.clone();
                c.sweep = None;
                for a in p {
                    apply(&mut c, a)?;
                }
                c.validate()?;
                Ok(c)
            })
            .collect()
    }
}

fn apply(c: &mut ExperimentConfig, axis: Axis) -> Result<()> {
    match axis {
        Axis::D(x) => match &mut c.instance {
            InstanceSpec::Nonsmooth { d, .. } | InstanceSpec::Smooth { d, .. } | InstanceSpec::Quadratic { d, .. } => {
                *d = x
            }
            InstanceSpec::File { .. } => return Err(Error::config("cannot sweep d over an instance file")),
        },
        Axis::Alpha(x) => {
            match &mut c.instance {
                InstanceSpec::Nonsmooth { alpha, .. } | InstanceSpec::Smooth { alpha, .. } => *alpha = x,
                _ => {}
            }
            match &mut c.algorithm {
                AlgorithmSpec::Dpsgd { alpha, .. }
                | AlgorithmSpec::PhasedSgd { alpha, .. }
                | AlgorithmSpec::PhasedErm { alpha, .. } => *alpha = x,
                AlgorithmSpec::Sgd { .. } => return Err(Error::config("sgd has no alpha to sweep")),
            }
        }
        Axis::Rho(x) => match &mut c.algorithm {
            AlgorithmSpec::Dpsgd { rho, .. } => *rho = x,
            _ => return Err(Error::config("only dpsgd takes rho")),
        },
        Axis::Mbar(x) => match &mut c.algorithm {
            AlgorithmSpec::Dpsgd { mbar, .. } => *mbar = x,
            _ => return Err(Error::config("only dpsgd takes mbar")),
        },
        Axis::Gamma(x) => {
            if c.oracle.kind != OracleName::Quantized {
                return Err(Error::config("gamma sweeps need the quantized oracle"));
            }
            c.oracle.capacity = Some(x);
        }
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::config(format!("{name} must be positive and finite, got {x}")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1),
            message: e.message().trim().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks every referenced parameter before anything runs.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        match &self.instance {
            &InstanceSpec::Nonsmooth { d, n, alpha, offset } => {
                check_positive("instance alpha", alpha)?;
                check_positive("offset", offset)?;
                if n == 0 {
                    return Err(Error::config("instance n must be at least 1"));
                }
                let k = problem_vector_count(alpha, offset);
                if k == 0 {
                    return Err(Error::config(format!("alpha = {alpha} with c = {offset} gives K = 0")));
                }
                if d < min_dimension(k) {
                    return Err(Error::config(format!(
                        "d = {d} too small for K = {k} problem vectors (need {})",
                        min_dimension(k)
                    )));
                }
            }
            &InstanceSpec::Smooth {
                d,
                n,
                alpha,
                radius,
                lipschitz,
            } => {
                check_positive("instance alpha", alpha)?;
                check_positive("radius", radius)?;
                check_positive("lipschitz", lipschitz)?;
                if d == 0 || n == 0 {
                    return Err(Error::config("instance d and n must be positive"));
                }
            }
            &InstanceSpec::Quadratic { d, n } => {
                if d == 0 || n == 0 {
                    return Err(Error::config("instance d and n must be positive"));
                }
            }
            InstanceSpec::File { path } => {
                if path.as_os_str().is_empty() {
                    return Err(Error::config("instance path is empty"));
                }
            }
        }
        match self.algorithm {
            AlgorithmSpec::Dpsgd {
                alpha, rho, mbar, delta, ..
            } => {
                check_positive("alpha", alpha)?;
                check_positive("rho", rho)?;
                if !(mbar >= 1.0) {
                    return Err(Error::config(format!("mbar must be >= 1 or inf, got {mbar}")));
                }
                check_unit("delta", delta)?;
            }
            AlgorithmSpec::PhasedSgd { alpha, delta } | AlgorithmSpec::PhasedErm { alpha, delta } => {
                check_positive("alpha", alpha)?;
                check_unit("delta", delta)?;
            }
            AlgorithmSpec::Sgd { steps, eta } => {
                if steps == 0 {
                    return Err(Error::config("sgd steps must be at least 1"));
                }
                check_positive("eta", eta)?;
            }
        }
        if self.oracle.kind == OracleName::Quantized {
            if self.oracle.bits == 0 || self.oracle.bits > crate::oracles::quantize::MAX_LEVEL_BITS {
                return Err(Error::config(format!("quantizer bits must lie in 1..=30, got {}", self.oracle.bits)));
            }
            if let (Some(cap), Some(d)) = (self.oracle.capacity, self.instance.dim()) {
                let need = payload_bits(d, self.oracle.bits);
                if cap < need {
                    return Err(Error::config(format!(
                        "capacity {cap} bits is below the {need}-bit payload at d = {d}"
                    )));
                }
            }
        }
        if self.oracle.capped
            && !(matches!(self.instance, InstanceSpec::Nonsmooth { .. })
                && matches!(self.algorithm, AlgorithmSpec::Dpsgd { .. }))
        {
            return Err(Error::config("capped counts need the nonsmooth instance and dpsgd"));
        }
        if let Some(grid) = &self.sweep {
            grid.expand(self)?;
        }
        Ok(())
    }

    /// Grid points of the sweep section, or just this config.
    pub fn points(&self) -> Result<Vec<ExperimentConfig>> {
        match &self.sweep {
            Some(grid) => grid.expand(self),
            None => Ok(vec![self.clone()]),
        }
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::config(format!("{name} must lie in (0, 1), got {x}")));
    }
    Ok(())
}
