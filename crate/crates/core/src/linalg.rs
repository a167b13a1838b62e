//! Dense vectors, Euclidean-ball constraint sets, orthonormal bases and the
//! projections between them.
//!
//! Throughout the crate a constraint ball is described by its **radius**; the
//! symbol `B` in parameter formulas is that radius.

use std::ops::Index;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A point of `R^d` with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    /// Builds a vector, rejecting NaN and infinite coordinates.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(index) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(entries))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    /// The `i`-th standard basis vector scaled by `value`.
    pub fn basis(d: usize, i: usize, value: f64) -> Self {
        let mut v = vec![0.0; d];
        v[i] = value;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (s, xi) in self.0.iter_mut().zip(&x.0) {
            *s += a * xi;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for s in &mut self.0 {
            *s *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self(self.0.iter().map(|x| a * x).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Bit patterns of the coordinates; equal keys mean bit-identical points.
    pub fn bit_key(&self) -> Vec<u64> {
        self.0.iter().map(|x| x.to_bits()).collect()
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.len(),
            });
        }
        Ok(())
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        debug_assert!(v.iter().all(|x| x.is_finite()));
        Self(v)
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators so the loop vectorises
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Closed Euclidean ball `{w : ||w - center|| <= radius}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallConstraint {
    center: DenseVector,
    radius: f64,
}

impl BallConstraint {
    pub fn new(center: DenseVector, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be finite and nonnegative, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    /// Ball of the given radius centred at the origin of `R^d`.
    pub fn centered(d: usize, radius: f64) -> Result<Self> {
        Self::new(DenseVector::zeros(d), radius)
    }

    pub fn center(&self) -> &DenseVector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, w: &DenseVector, tol: f64) -> bool {
        w.distance(&self.center) <= self.radius + tol
    }
}

/// Euclidean projection of `w` onto the ball.
pub fn project_ball(w: &DenseVector, ball: &BallConstraint) -> Result<DenseVector> {
    w.check_dim(ball.dim())?;
    let offset = w.sub(&ball.center);
    let dist = offset.norm();
    if dist <= ball.radius {
        return Ok(w.clone());
    }
    let mut out = ball.center.clone();
    out.axpy(ball.radius / dist, &offset);
    Ok(out)
}

/// Feasible set used by the optimizers: a ball, or the intersection of two
/// balls (the localized sets of the ERM-to-SCO wrapper).
#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    Ball(BallConstraint),
    Intersection(BallConstraint, BallConstraint),
}

impl Constraint {
    pub fn dim(&self) -> usize {
        match self {
            Constraint::Ball(b) | Constraint::Intersection(b, _) => b.dim(),
        }
    }

    pub fn contains(&self, w: &DenseVector, tol: f64) -> bool {
        match self {
            Constraint::Ball(b) => b.contains(w, tol),
            Constraint::Intersection(a, b) => a.contains(w, tol) && b.contains(w, tol),
        }
    }

    /// Radius of a ball known to contain the set.
    pub fn radius_bound(&self) -> f64 {
        match self {
            Constraint::Ball(b) => b.radius(),
            Constraint::Intersection(a, b) => a.radius().min(b.radius()),
        }
    }

    /// A point of the set (the centre of the smaller ball, projected).
    pub fn anchor(&self) -> Result<DenseVector> {
        match self {
            Constraint::Ball(b) => Ok(b.center().clone()),
            Constraint::Intersection(a, b) => {
                let (small, _) = if a.radius() <= b.radius() { (a, b) } else { (b, a) };
                self.project(small.center())
            }
        }
    }

    pub fn project(&self, w: &DenseVector) -> Result<DenseVector> {
        match self {
            Constraint::Ball(b) => project_ball(w, b),
            Constraint::Intersection(a, b) => project_two_balls(w, a, b),
        }
    }
}

/// Exact projection onto the intersection of two balls.
///
/// If neither single-ball projection lands in the other ball, the answer lies
/// on the intersection of the two spheres, which is a (d-2)-sphere inside a
/// hyperplane; the closest point of it is found in closed form.
fn project_two_balls(w: &DenseVector, a: &BallConstraint, b: &BallConstraint) -> Result<DenseVector> {
    const TOL: f64 = 1e-12;
    w.check_dim(a.dim())?;
    w.check_dim(b.dim())?;
    if a.contains(w, TOL) && b.contains(w, TOL) {
        return Ok(w.clone());
    }
    let pa = project_ball(w, a)?;
    if b.contains(&pa, TOL) {
        return Ok(pa);
    }
    let pb = project_ball(w, b)?;
    if a.contains(&pb, TOL) {
        return Ok(pb);
    }
    let axis = b.center().sub(a.center());
    let sep = axis.norm();
    let (ra, rb) = (a.radius(), b.radius());
    if sep > ra + rb + TOL {
        return Err(Error::InvalidParameter("constraint balls do not intersect".into()));
    }
    if sep < TOL {
        // concentric: the smaller ball is the intersection
        return project_ball(w, if ra <= rb { a } else { b });
    }
    let u = axis.scaled(1.0 / sep);
    // distance from a's centre to the plane of the intersection circle
    let t = (sep * sep + ra * ra - rb * rb) / (2.0 * sep);
    let circle_radius = (ra * ra - t * t).max(0.0).sqrt();
    let mut circle_center = a.center().clone();
    circle_center.axpy(t, &u);
    let rel = w.sub(&circle_center);
    let mut in_plane = rel.clone();
    in_plane.axpy(-rel.dot(&u), &u);
    let n = in_plane.norm();
    let mut out = circle_center;
    if n > 0.0 {
        out.axpy(circle_radius / n, &in_plane);
    } else {
        // w on the axis: every circle point is equidistant; pick one deterministically
        let mut e = DenseVector::zeros(w.len());
        for i in 0..w.len() {
            e = DenseVector::basis(w.len(), i, 1.0);
            e.axpy(-e.dot(&u), &u);
            if e.norm() > 1e-6 {
                break;
            }
        }
        let en = e.norm();
        out.axpy(circle_radius / en, &e);
    }
    Ok(out)
}

/// A list of orthonormal vectors spanning a subspace of `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis {
    dim: usize,
    vectors: Vec<DenseVector>,
}

impl OrthonormalBasis {
    pub fn empty(d: usize) -> Self {
        Self {
            dim: d,
            vectors: Vec::new(),
        }
    }

    /// Wraps vectors, checking orthonormality to within `1e-10`.
    pub fn new(d: usize, vectors: Vec<DenseVector>) -> Result<Self> {
        if vectors.len() > d {
            return Err(Error::InvalidParameter(format!(
                "{} vectors cannot be orthonormal in dimension {d}",
                vectors.len()
            )));
        }
        for v in &vectors {
            v.check_dim(d)?;
        }
        let basis = Self { dim: d, vectors };
        let err = basis.max_gram_error();
        if err > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "vectors are not orthonormal (max Gram deviation {err:e})"
            )));
        }
        Ok(basis)
    }

    pub(crate) fn from_trusted(d: usize, vectors: Vec<DenseVector>) -> Self {
        Self { dim: d, vectors }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[DenseVector] {
        &self.vectors
    }

    pub fn get(&self, j: usize) -> &DenseVector {
        &self.vectors[j]
    }

    /// Coordinates `<w, b_j>` of `w` in the basis.
    pub fn coefficients(&self, w: &DenseVector) -> Vec<f64> {
        self.vectors.iter().map(|b| b.dot(w)).collect()
    }

    /// Largest entry of `|G - I|` where `G` is the Gram matrix.
    pub fn max_gram_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }

    /// Frobenius norm of `G - I`.
    pub fn gram_frobenius_error(&self) -> f64 {
        let mut s = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                let e = a.dot(b) - target;
                s += e * e;
            }
        }
        s.sqrt()
    }

    /// Largest `|<a, b>|` over pairs drawn from the two bases.
    pub fn max_cross_inner(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for a in &self.vectors {
            for b in &other.vectors {
                worst = worst.max(a.dot(b).abs());
            }
        }
        worst
    }
}

/// Orthogonal projection `sum_j <w, b_j> b_j` onto the span of the basis.
pub fn project_span(w: &DenseVector, basis: &OrthonormalBasis) -> Result<DenseVector> {
    w.check_dim(basis.dim())?;
    let mut out = DenseVector::zeros(w.len());
    for b in basis.vectors() {
        out.axpy(b.dot(w), b);
    }
    Ok(out)
}

/// Projection onto the orthogonal complement of the span.
pub fn project_complement(w: &DenseVector, basis: &OrthonormalBasis) -> Result<DenseVector> {
    Ok(w.sub(&project_span(w, basis)?))
}

/// I.i.d. `N(0, std^2)` coordinates.
pub fn gaussian_vector<R: Rng + ?Sized>(d: usize, std: f64, rng: &mut R) -> Result<DenseVector> {
    if !(std >= 0.0) || !std.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "standard deviation must be finite and nonnegative, got {std}"
        )));
    }
    if std == 0.0 {
        return Ok(DenseVector::zeros(d));
    }
    Ok(DenseVector(
        (0..d)
            .map(|_| std * rng.sample::<f64, _>(StandardNormal))
            .collect(),
    ))
}

/// Removes the components along every vector of `basis` (in place).
fn orthogonalize_against(v: &mut DenseVector, basis: &[DenseVector]) {
    for b in basis {
        let c = b.dot(v);
        v.axpy(-c, b);
    }
}

/// Uniformly random `k`-dimensional subspace of the orthogonal complement of
/// `orthogonal_to`, returned as an orthonormal basis.
///
/// Gaussian vectors are orthonormalised by Gram-Schmidt applied twice against
/// both the constraint basis and the vectors already accepted.
pub fn sample_subspace<R: Rng + ?Sized>(
    d: usize,
    k: usize,
    orthogonal_to: Option<&OrthonormalBasis>,
    rng: &mut R,
) -> Result<OrthonormalBasis> {
    let existing: &[DenseVector] = match orthogonal_to {
        Some(b) => {
            if b.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: b.dim(),
                });
            }
            b.vectors()
        }
        None => &[],
    };
    if k + existing.len() > d {
        return Err(Error::SubspaceTooLarge {
            d,
            requested: k,
            existing: existing.len(),
        });
    }
    let mut accepted: Vec<DenseVector> = Vec::with_capacity(k);
    while accepted.len() < k {
        let mut v = gaussian_vector(d, 1.0, rng)?;
        let start_norm = v.norm();
        for _ in 0..2 {
            orthogonalize_against(&mut v, existing);
            orthogonalize_against(&mut v, &accepted);
        }
        let n = v.norm();
        if n <= 1e-8 * start_norm {
            // numerically inside the span already; draw again
            continue;
        }
        v.scale(1.0 / n);
        accepted.push(v);
    }
    Ok(OrthonormalBasis::from_trusted(d, accepted))
}
