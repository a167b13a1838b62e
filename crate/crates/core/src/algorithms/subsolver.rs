//! Solvers for `F(w) = (1/n) sum_i l_i(w) + lambda ||w - c||^2` over the
//! constraint set, to a certified accuracy.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::oracles::{ProxyOracle, ResponseRule};

/// One regularized subproblem.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularizedProblem {
    pub lambda: f64,
    pub center: DenseVector,
    /// Required objective gap `F(w) - min F`.
    pub target: f64,
    pub start: DenseVector,
    /// Allowed failure probability.
    pub failure_prob: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubsolverOutput {
    pub point: DenseVector,
    /// Upper bound on `F(point) - min F`.
    pub certified_gap: f64,
    pub iterations: usize,
}

pub trait Subsolver {
    fn solve(
        &self,
        oracle: &mut ProxyOracle<'_>,
        problem: &RegularizedProblem,
        rng: &mut dyn RngCore,
    ) -> Result<SubsolverOutput>;
}

/// Deterministic projected gradient descent with step `1/(beta + 2 lambda)`.
///
/// Each iteration queries every loss once. The gap is certified by the
/// strong-convexity lower bound: with `mu = 2 lambda` and gradient `g` at
/// `w`, `min F >= F(w) + <g, u - w> + mu/2 ||u - w||^2` where
/// `u = P(w - g/mu)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectedGradientSubsolver {
    /// Multiplier on the linear-rate iteration estimate.
    pub safety: f64,
}

impl Default for ProjectedGradientSubsolver {
    fn default() -> Self {
        Self { safety: 2.0 }
    }
}

impl ProjectedGradientSubsolver {
    fn gradient(
        oracle: &mut ProxyOracle<'_>,
        problem: &RegularizedProblem,
        w: &DenseVector,
        rng: &mut dyn RngCore,
    ) -> Result<DenseVector> {
        let n = oracle.objective().num_losses();
        let indices: Vec<usize> = (0..n).collect();
        let mut g = oracle.round_at(w, &indices, &ResponseRule::Identity, rng)?.estimate()?;
        g.axpy(2.0 * problem.lambda, &w.sub(&problem.center));
        Ok(g)
    }
}

impl Subsolver for ProjectedGradientSubsolver {
    fn solve(
        &self,
        oracle: &mut ProxyOracle<'_>,
        problem: &RegularizedProblem,
        rng: &mut dyn RngCore,
    ) -> Result<SubsolverOutput> {
        if !(problem.lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "regularization must be positive, got {}",
                problem.lambda
            )));
        }
        let constraint = oracle.objective().constraint();
        let start = constraint.project(&problem.start)?;
        if problem.target.is_infinite() {
            return Ok(SubsolverOutput {
                point: start,
                certified_gap: f64::INFINITY,
                iterations: 0,
            });
        }
        if !(problem.target > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "accuracy target must be positive, got {}",
                problem.target
            )));
        }
        let beta = oracle.objective().smoothness().ok_or_else(|| {
            Error::InvalidParameter("projected gradient subsolver needs smooth losses".into())
        })?;
        let mu = 2.0 * problem.lambda;
        let step = 1.0 / (beta + mu);
        let certify = |w: &DenseVector, g: &DenseVector| -> Result<f64> {
            let mut u = w.clone();
            u.axpy(-1.0 / mu, g);
            let u = constraint.project(&u)?;
            let diff = u.sub(w);
            Ok((-g.dot(&diff) - 0.5 * mu * diff.norm_sq()).max(0.0))
        };

        let mut w = start;
        let mut g = Self::gradient(oracle, problem, &w, rng)?;
        let mut gap = certify(&w, &g)?;
        let kappa = (beta + mu) / mu;
        let ratio = (gap / problem.target).max(1.0);
        let cap = (self.safety * (kappa * (ratio * kappa).ln()).ceil()) as usize + 1;
        let mut iterations = 0;
        while gap > problem.target {
            if iterations >= cap {
                return Err(Error::IterationCap {
                    cap,
                    gap,
                    target: problem.target,
                });
            }
            w.axpy(-step, &g);
            w = constraint.project(&w)?;
            g = Self::gradient(oracle, problem, &w, rng)?;
            gap = certify(&w, &g)?;
            iterations += 1;
        }
        Ok(SubsolverOutput {
            point: w,
            certified_gap: gap,
            iterations,
        })
    }
}

/// Solves one regularized subproblem with the default subsolver.
pub fn strongly_convex_subsolver(
    oracle: &mut ProxyOracle<'_>,
    problem: &RegularizedProblem,
    rng: &mut dyn RngCore,
) -> Result<SubsolverOutput> {
    ProjectedGradientSubsolver::default().solve(oracle, problem, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{FirstOrderReply, Objective, Piece};
    use crate::linalg::{BallConstraint, Constraint};
    use crate::rng::SplittableRng;

    /// `l_i(w) = 1/2 sum_j s_j (w_j - a_j)^2`, identical for every `i`, with
    /// an interior regularized minimizer.
    struct Diagonal {
        scales: Vec<f64>,
        target: Vec<f64>,
        n: usize,
    }

    impl Objective for Diagonal {
        fn dim(&self) -> usize {
            self.scales.len()
        }
        fn num_losses(&self) -> usize {
            self.n
        }
        fn evaluate(&self, _i: usize, w: &DenseVector) -> Result<FirstOrderReply> {
            let g: Vec<f64> = (0..self.dim()).map(|j| self.scales[j] * (w[j] - self.target[j])).collect();
            let value = (0..self.dim())
                .map(|j| 0.5 * self.scales[j] * (w[j] - self.target[j]).powi(2))
                .sum();
            Ok(FirstOrderReply {
                value,
                gradient: DenseVector::from(g),
                piece: Piece::Generic,
            })
        }
        fn lipschitz(&self) -> f64 {
            2.0 * self.scales.iter().cloned().fold(0.0, f64::max)
        }
        fn smoothness(&self) -> Option<f64> {
            Some(self.scales.iter().cloned().fold(0.0, f64::max))
        }
        fn constraint(&self) -> Constraint {
            Constraint::Ball(BallConstraint::centered(self.dim(), 1.0).unwrap())
        }
    }

    fn problem(target: f64) -> (Diagonal, RegularizedProblem) {
        let obj = Diagonal {
            scales: vec![1.0, 0.5, 0.2, 0.05, 0.01],
            target: vec![0.3, -0.2, 0.1, 0.2, -0.1],
            n: 4,
        };
        let p = RegularizedProblem {
            lambda: 0.01,
            center: DenseVector::from(vec![0.1; 5]),
            target,
            start: DenseVector::zeros(5),
            failure_prob: 0.0,
        };
        (obj, p)
    }

    /// Closed form: coordinate `j` minimizes at `(s_j a_j + 2 lambda c_j)/(s_j + 2 lambda)`,
    /// which lies inside the unit ball here.
    fn exact_gap(o: &Diagonal, p: &RegularizedProblem, w: &DenseVector) -> f64 {
        let f = |x: &DenseVector| {
            o.evaluate(0, x).unwrap().value + p.lambda * x.sub(&p.center).norm_sq()
        };
        let star: Vec<f64> = (0..5)
            .map(|j| (o.scales[j] * o.target[j] + 2.0 * p.lambda * p.center[j]) / (o.scales[j] + 2.0 * p.lambda))
            .collect();
        let star = DenseVector::from(star);
        assert!(star.norm() < 1.0);
        f(w) - f(&star)
    }

    #[test]
    fn meets_target() {
        let (q, p) = problem(1e-8);
        let mut oracle = ProxyOracle::new(&q);
        let mut rng = SplittableRng::new(2, 0);
        let out = strongly_convex_subsolver(&mut oracle, &p, &mut rng).unwrap();
        let gap = exact_gap(&q, &p, &out.point);
        assert!(gap <= p.target, "gap {gap}");
        assert!(gap <= out.certified_gap + 1e-15);
        assert!(out.iterations > 1);
        assert_eq!(oracle.stats().calls_total, 4 * (out.iterations as u64 + 1));
    }

    #[test]
    fn infinite_target_is_free() {
        let (q, p) = problem(f64::INFINITY);
        let mut oracle = ProxyOracle::new(&q);
        let mut rng = SplittableRng::new(3, 0);
        let out = strongly_convex_subsolver(&mut oracle, &p, &mut rng).unwrap();
        assert_eq!(out.point, p.start);
        assert_eq!(oracle.stats().calls_total, 0);
    }

    #[test]
    fn halving_target_adds_constant_iterations() {
        let mut counts = Vec::new();
        for j in 0..8 {
            let (q, p) = problem(1e-4 / 2f64.powi(j));
            let mut oracle = ProxyOracle::new(&q);
            let mut rng = SplittableRng::new(4, 0);
            counts.push(strongly_convex_subsolver(&mut oracle, &p, &mut rng).unwrap().iterations as f64);
        }
        let incs: Vec<f64> = counts.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = incs.iter().sum::<f64>() / incs.len() as f64;
        // linear rate: each halving costs a roughly fixed number of iterations
        assert!(mean > 0.0);
        for inc in incs {
            assert!((inc - mean).abs() <= mean.max(2.0), "increments not roughly constant: {counts:?}");
        }
    }

    #[test]
    fn iteration_cap_reported() {
        let (q, p) = problem(1e-12);
        let mut oracle = ProxyOracle::new(&q);
        let mut rng = SplittableRng::new(5, 0);
        let tight = ProjectedGradientSubsolver { safety: 0.01 };
        assert!(matches!(tight.solve(&mut oracle, &p, &mut rng), Err(Error::IterationCap { .. })));
    }
}
