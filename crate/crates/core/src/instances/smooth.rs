//! Linear-plus-ridge instance built from a Rademacher product distribution.
//!
//! `l_i(w) = <w, x_i> + lambda ||w||^2` over the ball of radius `72B`. Of the
//! `n` data points, `N = floor(n alpha / (B L))` are drawn from
//! `(L/sqrt d) D_theta` and sit at random positions; the rest are zero.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{BallConstraint, Constraint, DenseVector};
use crate::rng::SplittableRng;

use super::{check_index, FirstOrderReply, Objective, Piece};

/// Radius multiplier of the constraint ball.
const BALL_FACTOR: f64 = 72.0;

/// One draw from the product distribution on `{-1, +1}^d` with mean `theta`.
pub fn rademacher_product_sample<R: Rng + ?Sized>(theta: &DenseVector, rng: &mut R) -> Result<DenseVector> {
    if let Some(j) = theta.iter().position(|t| !(-1.0..=1.0).contains(t)) {
        return Err(Error::InvalidParameter(format!(
            "theta[{j}] = {} lies outside [-1, 1]",
            theta[j]
        )));
    }
    Ok(DenseVector::from(
        theta
            .iter()
            .map(|t| {
                let u: f64 = rng.random();
                if u < (1.0 + t) / 2.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect::<Vec<_>>(),
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothInstance {
    pub(crate) d: usize,
    pub(crate) n: usize,
    pub(crate) alpha: f64,
    pub(crate) radius: f64,
    pub(crate) lipschitz: f64,
    pub(crate) lambda: f64,
    pub(crate) nonzero: usize,
    pub(crate) theta: DenseVector,
    pub(crate) data: Vec<DenseVector>,
    pub(crate) mean: DenseVector,
    pub(crate) seed: u64,
    pub(crate) stream: u64,
}

/// Suboptimality computed two ways; they agree up to rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothSuboptimality {
    /// `L(w) - L(w*)`
    pub direct: f64,
    /// `lambda ||w - w*||^2`
    pub identity: f64,
}

impl SmoothInstance {
    /// Samples `theta` uniformly from `[-1, 1]^d`, then the data.
    pub fn sample(
        d: usize,
        n: usize,
        alpha: f64,
        radius: f64,
        lipschitz: f64,
        rng: &mut SplittableRng,
    ) -> Result<Self> {
        let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self::sample_with_theta(d, n, alpha, radius, lipschitz, DenseVector::from(theta), rng)
    }

    pub fn sample_with_theta(
        d: usize,
        n: usize,
        alpha: f64,
        radius: f64,
        lipschitz: f64,
        theta: DenseVector,
        rng: &mut SplittableRng,
    ) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::InvalidParameter("d and n must be positive".into()));
        }
        if !(alpha > 0.0) || !(radius > 0.0) || !(lipschitz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha, B, L must be positive, got {alpha}, {radius}, {lipschitz}"
            )));
        }
        theta.check_dim(d)?;
        let nonzero = crate::floor_tol(n as f64 * alpha / (radius * lipschitz));
        if nonzero < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "N = floor(n alpha / (B L)) = {nonzero} < 1; increase n or alpha"
            )));
        }
        let nonzero = (nonzero as usize).min(n);
        let (seed, stream) = (rng.seed(), rng.stream());
        let scale = lipschitz / (d as f64).sqrt();
        let positions = sample(rng, n, nonzero);
        let mut data = vec![DenseVector::zeros(d); n];
        for pos in positions.iter() {
            let mut x = rademacher_product_sample(&theta, rng)?;
            x.scale(scale);
            data[pos] = x;
        }
        Ok(Self::assemble(
            d,
            n,
            alpha,
            radius,
            lipschitz,
            alpha / (144.0 * radius * radius),
            nonzero,
            theta,
            data,
            seed,
            stream,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        d: usize,
        n: usize,
        alpha: f64,
        radius: f64,
        lipschitz: f64,
        lambda: f64,
        nonzero: usize,
        theta: DenseVector,
        data: Vec<DenseVector>,
        seed: u64,
        stream: u64,
    ) -> Self {
        let mut mean = DenseVector::zeros(d);
        for x in &data {
            mean.axpy(1.0, x);
        }
        mean.scale(1.0 / n as f64);
        Self {
            d,
            n,
            alpha,
            radius,
            lipschitz,
            lambda,
            nonzero,
            theta,
            data,
            mean,
            seed,
            stream,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of nonzero data points `N`.
    pub fn nonzero(&self) -> usize {
        self.nonzero
    }

    pub fn theta(&self) -> &DenseVector {
        &self.theta
    }

    pub fn data(&self) -> &[DenseVector] {
        &self.data
    }

    pub fn data_mean(&self) -> &DenseVector {
        &self.mean
    }

    pub fn provenance(&self) -> (u64, u64) {
        (self.seed, self.stream)
    }

    /// Unconstrained minimizer `-mean(x) / (2 lambda)`; it lies in the ball.
    pub fn optimum(&self) -> DenseVector {
        self.mean.scaled(-1.0 / (2.0 * self.lambda))
    }

    pub fn value(&self, w: &DenseVector) -> Result<f64> {
        w.check_dim(self.d)?;
        Ok(w.dot(&self.mean) + self.lambda * w.norm_sq())
    }

    pub fn suboptimality_pair(&self, w: &DenseVector) -> Result<SmoothSuboptimality> {
        let star = self.optimum();
        Ok(SmoothSuboptimality {
            direct: self.value(w)? - self.value(&star)?,
            identity: self.lambda * w.sub(&star).norm_sq(),
        })
    }
}

impl Objective for SmoothInstance {
    fn dim(&self) -> usize {
        self.d
    }

    fn num_losses(&self) -> usize {
        self.n
    }

    fn evaluate(&self, i: usize, w: &DenseVector) -> Result<FirstOrderReply> {
        check_index(i, self.n)?;
        w.check_dim(self.d)?;
        let x = &self.data[i];
        let mut gradient = x.clone();
        gradient.axpy(2.0 * self.lambda, w);
        Ok(FirstOrderReply {
            value: w.dot(x) + self.lambda * w.norm_sq(),
            gradient,
            piece: Piece::Generic,
        })
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz + 2.0 * self.lambda * BALL_FACTOR * self.radius
    }

    fn smoothness(&self) -> Option<f64> {
        Some(2.0 * self.lambda)
    }

    fn constraint(&self) -> Constraint {
        Constraint::Ball(BallConstraint::centered(self.d, BALL_FACTOR * self.radius).expect("radius"))
    }

    fn minimizer(&self) -> Option<DenseVector> {
        Some(self.optimum())
    }

    fn empirical_loss(&self, w: &DenseVector) -> Result<f64> {
        self.value(w)
    }

    fn suboptimality(&self, w: &DenseVector) -> Result<Option<f64>> {
        Ok(Some(self.suboptimality_pair(w)?.identity))
    }
}
