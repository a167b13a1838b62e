use crate::error::{Error, Result};
use crate::instances::{FirstOrderReply, Objective};
use crate::linalg::{BallConstraint, Constraint, DenseVector};

/// The normalized problem `l^(v) = l(c + B v) / (B L)` over the unit ball,
/// for an objective over the ball of radius `B` around `c` with Lipschitz
/// constant `L`. Losses become 1-Lipschitz; suboptimality shrinks by `B L`.
pub struct RescaledObjective<O> {
    inner: O,
    center: DenseVector,
    radius: f64,
    lipschitz: f64,
}

/// Wraps `inner` as its unit-scale problem.
pub fn rescale_problem<O: Objective>(inner: O) -> Result<RescaledObjective<O>> {
    let Constraint::Ball(ball) = inner.constraint() else {
        return Err(Error::InvalidParameter("rescaling needs a ball constraint".into()));
    };
    let (radius, lipschitz) = (ball.radius(), inner.lipschitz());
    if !(radius > 0.0) || !(lipschitz > 0.0) || !lipschitz.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "rescaling needs positive B and L, got B={radius}, L={lipschitz}"
        )));
    }
    Ok(RescaledObjective {
        center: ball.center().clone(),
        inner,
        radius,
        lipschitz,
    })
}

impl<O: Objective> RescaledObjective<O> {
    pub fn inner(&self) -> &O {
        &self.inner
    }

    /// `B L`, the factor between unit and original suboptimality.
    pub fn scale(&self) -> f64 {
        self.radius * self.lipschitz
    }

    /// `w = c + B v`.
    pub fn to_original(&self, v: &DenseVector) -> DenseVector {
        let mut w = self.center.clone();
        w.axpy(self.radius, v);
        w
    }

    /// `v = (w - c) / B`.
    pub fn to_unit(&self, w: &DenseVector) -> DenseVector {
        w.sub(&self.center).scaled(1.0 / self.radius)
    }
}

impl<O: Objective> Objective for RescaledObjective<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn num_losses(&self) -> usize {
        self.inner.num_losses()
    }
    fn evaluate(&self, i: usize, v: &DenseVector) -> Result<FirstOrderReply> {
        let r = self.inner.evaluate(i, &self.to_original(v))?;
        Ok(FirstOrderReply {
            value: r.value / self.scale(),
            gradient: r.gradient.scaled(1.0 / self.lipschitz),
            piece: r.piece,
        })
    }
    fn lipschitz(&self) -> f64 {
        1.0
    }
    fn smoothness(&self) -> Option<f64> {
        self.inner.smoothness().map(|b| b * self.radius / self.lipschitz)
    }
    fn constraint(&self) -> Constraint {
        Constraint::Ball(BallConstraint::centered(self.dim(), 1.0).expect("unit ball"))
    }
    fn minimizer(&self) -> Option<DenseVector> {
        self.inner.minimizer().map(|w| self.to_unit(&w))
    }
    fn identical_losses(&self) -> bool {
        self.inner.identical_losses()
    }
    fn piece_count(&self) -> usize {
        self.inner.piece_count()
    }
    fn empirical_loss(&self, v: &DenseVector) -> Result<f64> {
        Ok(self.inner.empirical_loss(&self.to_original(v))? / self.scale())
    }
}
