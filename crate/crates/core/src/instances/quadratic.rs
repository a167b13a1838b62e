//! Quadratic test losses `l_i(w) = (c/2) ||w - a_i||^2` on a centred ball.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{gaussian_vector, project_ball, BallConstraint, Constraint, DenseVector};
use crate::rng::SplittableRng;

use super::{check_index, FirstOrderReply, Objective, Piece};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticTestLoss {
    pub(crate) targets: Vec<DenseVector>,
    pub(crate) curvature: f64,
    pub(crate) radius: f64,
    pub(crate) mean: DenseVector,
    /// mean of `||a_i - mean||^2`
    pub(crate) spread: f64,
    pub(crate) max_target_norm: f64,
}

impl QuadraticTestLoss {
    pub fn new(targets: Vec<DenseVector>, curvature: f64, radius: f64) -> Result<Self> {
        let Some(first) = targets.first() else {
            return Err(Error::InvalidParameter("at least one target is required".into()));
        };
        let d = first.len();
        for t in &targets {
            t.check_dim(d)?;
        }
        if !(curvature >= 0.0) || !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "curvature must be nonnegative and radius positive, got {curvature}, {radius}"
            )));
        }
        let n = targets.len() as f64;
        let mut mean = DenseVector::zeros(d);
        for t in &targets {
            mean.axpy(1.0 / n, t);
        }
        let spread = targets.iter().map(|t| t.sub(&mean).norm_sq()).sum::<f64>() / n;
        let max_target_norm = targets.iter().map(|t| t.norm()).fold(0.0, f64::max);
        Ok(Self {
            targets,
            curvature,
            radius,
            mean,
            spread,
            max_target_norm,
        })
    }

    /// The family used for optimizer checks: curvature 1/2 on the unit ball,
    /// targets `mu + 0.2 u_i` with `||mu|| = 0.8` and `u_i` uniform in the
    /// unit ball, so the Lipschitz constant is at most 1.
    pub fn sample_family(d: usize, n: usize, rng: &mut SplittableRng) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::InvalidParameter("d and n must be positive".into()));
        }
        let mut mu = gaussian_vector(d, 1.0, rng)?;
        let norm = mu.norm();
        mu.scale(0.8 / norm);
        let mut targets = Vec::with_capacity(n);
        for _ in 0..n {
            let mut u = gaussian_vector(d, 1.0, rng)?;
            let un = u.norm();
            let r: f64 = rng.random::<f64>().powf(1.0 / d as f64);
            u.scale(0.2 * r / un);
            targets.push(mu.add(&u));
        }
        Self::new(targets, 0.5, 1.0)
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn targets(&self) -> &[DenseVector] {
        &self.targets
    }

    pub fn target_mean(&self) -> &DenseVector {
        &self.mean
    }

    fn ball(&self) -> BallConstraint {
        BallConstraint::centered(self.mean.len(), self.radius).expect("radius")
    }
}

impl Objective for QuadraticTestLoss {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn num_losses(&self) -> usize {
        self.targets.len()
    }

    fn evaluate(&self, i: usize, w: &DenseVector) -> Result<FirstOrderReply> {
        check_index(i, self.targets.len())?;
        w.check_dim(self.dim())?;
        let diff = w.sub(&self.targets[i]);
        Ok(FirstOrderReply {
            value: 0.5 * self.curvature * diff.norm_sq(),
            gradient: diff.scaled(self.curvature),
            piece: Piece::Generic,
        })
    }

    fn lipschitz(&self) -> f64 {
        self.curvature * (self.radius + self.max_target_norm)
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.curvature)
    }

    fn constraint(&self) -> Constraint {
        Constraint::Ball(self.ball())
    }

    fn minimizer(&self) -> Option<DenseVector> {
        project_ball(&self.mean, &self.ball()).ok()
    }

    fn empirical_loss(&self, w: &DenseVector) -> Result<f64> {
        w.check_dim(self.dim())?;
        Ok(0.5 * self.curvature * (w.sub(&self.mean).norm_sq() + self.spread))
    }

    fn suboptimality(&self, w: &DenseVector) -> Result<Option<f64>> {
        w.check_dim(self.dim())?;
        let star = self.minimizer().expect("projection");
        let gap = w.sub(&self.mean).norm_sq() - star.sub(&self.mean).norm_sq();
        Ok(Some(0.5 * self.curvature * gap))
    }
}
