//! Max-of-absolute-deviations instance with a hidden-subspace norm penalty.
//!
//! `l(w) = max{ max_k |<w, X_k> - c alpha|, 2 ||P_V w|| }` over the unit ball,
//! where `X_1..X_K` are orthonormal, `V` is a random `d/2`-dimensional
//! subspace orthogonal to them, and `K = floor(1/(c alpha)^2)`. The minimizer
//! is `c alpha sum_k X_k` with loss zero.

use crate::error::{Error, Result};
use crate::linalg::{sample_subspace, BallConstraint, Constraint, DenseVector, OrthonormalBasis};
use crate::rng::SplittableRng;

use super::{check_index, FirstOrderReply, Objective, Piece};

/// Offset constant `c` used by the construction unless overridden.
pub const DEFAULT_OFFSET: f64 = 480.0;

/// Pieces within this distance of the maximum count as active.
const TIE_TOL: f64 = 1e-12;

/// `K = floor(1 / (c alpha)^2)`.
pub fn problem_vector_count(alpha: f64, offset: f64) -> usize {
    let k = 1.0 / (offset * alpha).powi(2);
    crate::floor_tol(k).max(0.0) as usize
}

/// Smallest admissible dimension `2 (K + 1)`.
pub fn min_dimension(k: usize) -> usize {
    2 * (k + 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonsmoothInstance {
    pub(crate) d: usize,
    pub(crate) n: usize,
    pub(crate) alpha: f64,
    pub(crate) offset: f64,
    pub(crate) x: OrthonormalBasis,
    pub(crate) v: OrthonormalBasis,
    pub(crate) seed: u64,
    pub(crate) stream: u64,
}

impl NonsmoothInstance {
    /// Samples an instance with the default offset `c = 480`.
    pub fn sample(d: usize, alpha: f64, n: usize, rng: &mut SplittableRng) -> Result<Self> {
        Self::sample_with_offset(d, alpha, DEFAULT_OFFSET, n, rng)
    }

    pub fn sample_with_offset(
        d: usize,
        alpha: f64,
        offset: f64,
        n: usize,
        rng: &mut SplittableRng,
    ) -> Result<Self> {
        if !(alpha > 0.0) || !(offset > 0.0) || !alpha.is_finite() || !offset.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha and offset must be positive, got alpha={alpha}, c={offset}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let k = problem_vector_count(alpha, offset);
        if k == 0 {
            return Err(Error::InvalidParameter(format!(
                "alpha={alpha} with c={offset} gives K=0 problem vectors; need alpha <= 1/c"
            )));
        }
        if d < min_dimension(k) {
            return Err(Error::DimensionTooSmall {
                d,
                min_d: min_dimension(k),
                vectors: k,
            });
        }
        let (seed, stream) = (rng.seed(), rng.stream());
        let v = sample_subspace(d, d / 2, None, rng)?;
        let x = sample_subspace(d, k, Some(&v), rng)?;
        Ok(Self {
            d,
            n,
            alpha,
            offset,
            x,
            v,
            seed,
            stream,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn k(&self) -> usize {
        self.x.count()
    }

    pub fn problem_vectors(&self) -> &OrthonormalBasis {
        &self.x
    }

    pub fn hidden_subspace(&self) -> &OrthonormalBasis {
        &self.v
    }

    /// `(seed, stream)` of the generator that produced the instance.
    pub fn provenance(&self) -> (u64, u64) {
        (self.seed, self.stream)
    }

    /// `c alpha sum_k X_k`.
    pub fn optimum(&self) -> DenseVector {
        let mut w = DenseVector::zeros(self.d);
        for x in self.x.vectors() {
            w.axpy(self.offset * self.alpha, x);
        }
        w
    }

    /// The loss (all copies are identical).
    pub fn value(&self, w: &DenseVector) -> Result<f64> {
        Ok(self.oracle(w)?.value)
    }

    /// First-order oracle with deterministic tie-breaking: the smallest `k`
    /// whose piece attains the maximum wins; the regularizer only when no
    /// problem piece does. `sign(0) = +1`; the regularizer's subgradient at
    /// `P_V w = 0` is zero.
    pub fn oracle(&self, w: &DenseVector) -> Result<FirstOrderReply> {
        w.check_dim(self.d)?;
        let ca = self.offset * self.alpha;
        let inner: Vec<f64> = self.x.coefficients(w);
        let pieces: Vec<f64> = inner.iter().map(|t| (t - ca).abs()).collect();
        let coef_v = self.v.coefficients(w);
        let pv_norm = coef_v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let h = 2.0 * pv_norm;
        let best = pieces.iter().copied().fold(h, f64::max);

        if let Some(k) = pieces.iter().position(|&f| f >= best - TIE_TOL) {
            let sign = if inner[k] - ca >= 0.0 { 1.0 } else { -1.0 };
            return Ok(FirstOrderReply {
                value: best,
                gradient: self.x.get(k).scaled(sign),
                piece: Piece::Problem(k),
            });
        }
        let mut gradient = DenseVector::zeros(self.d);
        if pv_norm > 0.0 {
            for (b, c) in self.v.vectors().iter().zip(&coef_v) {
                gradient.axpy(2.0 * c / pv_norm, b);
            }
        }
        Ok(FirstOrderReply {
            value: best,
            gradient,
            piece: Piece::Regularizer,
        })
    }
}

impl Objective for NonsmoothInstance {
    fn dim(&self) -> usize {
        self.d
    }

    fn num_losses(&self) -> usize {
        self.n
    }

    fn evaluate(&self, i: usize, w: &DenseVector) -> Result<FirstOrderReply> {
        check_index(i, self.n)?;
        self.oracle(w)
    }

    fn lipschitz(&self) -> f64 {
        2.0
    }

    fn smoothness(&self) -> Option<f64> {
        None
    }

    fn constraint(&self) -> Constraint {
        Constraint::Ball(BallConstraint::centered(self.d, 1.0).expect("unit ball"))
    }

    fn minimizer(&self) -> Option<DenseVector> {
        Some(self.optimum())
    }

    fn identical_losses(&self) -> bool {
        true
    }

    fn piece_count(&self) -> usize {
        self.k()
    }

    fn empirical_loss(&self, w: &DenseVector) -> Result<f64> {
        self.value(w)
    }
}
