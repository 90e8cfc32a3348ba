//! Shared domain types: points, landmark sets, convex domains, objectives and
//! numerical tolerances.

use std::ops::Deref;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lp::{ConstraintSystem, LinearConstraint};

/// A point of `R^d` with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Ordered landmark points `λ_1..λ_n`; the vertex set of every complex.
///
/// Construction checks for a uniform dimension and finite coordinates.
/// Pairwise distinctness is a validation finding (see [`crate::validate`]),
/// so that duplicate inputs can be reported rather than rejected blindly.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    dim: usize,
    points: Vec<Point>,
}

impl LandmarkSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidArgument("landmark set is empty".into()));
        };
        let dim = first.len();
        let mut out = Vec::with_capacity(points.len());
        for (index, p) in points.into_iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite { index });
            }
            out.push(Point(p));
        }
        Ok(LandmarkSet { dim, points: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// Relabels the landmarks: the result's `i`-th point is `self[perm[i]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        LandmarkSet {
            dim: self.dim,
            points: perm.iter().map(|&i| self.points[i].clone()).collect(),
        }
    }
}

/// Closed convex set `X ⊆ R^d` given by linear constraints and optional box
/// bounds. An empty constraint list represents all of `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexDomain {
    dim: usize,
    inequalities: Vec<(Vec<f64>, f64)>,
    equalities: Vec<(Vec<f64>, f64)>,
    bounds: Option<Vec<(f64, f64)>>,
}

impl ConvexDomain {
    pub fn whole_space(dim: usize) -> Self {
        ConvexDomain {
            dim,
            inequalities: Vec::new(),
            equalities: Vec::new(),
            bounds: None,
        }
    }

    pub fn new(
        dim: usize,
        inequalities: Vec<(Vec<f64>, f64)>,
        equalities: Vec<(Vec<f64>, f64)>,
        bounds: Option<Vec<(f64, f64)>>,
    ) -> Result<Self> {
        for (a, b) in inequalities.iter().chain(&equalities) {
            if a.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.len(),
                });
            }
            if !b.is_finite() || a.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidArgument(
                    "domain constraint has a non-finite coefficient".into(),
                ));
            }
        }
        if let Some(bounds) = &bounds {
            if bounds.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: bounds.len(),
                });
            }
            if bounds.iter().any(|(lo, hi)| lo.is_nan() || hi.is_nan()) {
                return Err(Error::InvalidArgument("NaN box bound".into()));
            }
        }
        Ok(ConvexDomain {
            dim,
            inequalities,
            equalities,
            bounds,
        })
    }

    /// The box `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        ConvexDomain {
            dim,
            inequalities: Vec::new(),
            equalities: Vec::new(),
            bounds: Some(vec![(lo, hi); dim]),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inequalities(&self) -> &[(Vec<f64>, f64)] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[(Vec<f64>, f64)] {
        &self.equalities
    }

    pub fn bounds(&self) -> Option<&[(f64, f64)]> {
        self.bounds.as_deref()
    }

    /// Linear inequality rows of the domain, with box bounds expanded into
    /// `±x_i ≤ c` rows. Infinite bounds produce no row.
    pub fn inequality_rows(&self) -> Vec<LinearConstraint> {
        let mut rows: Vec<LinearConstraint> = self
            .inequalities
            .iter()
            .map(|(a, b)| LinearConstraint::new(a.clone(), *b))
            .collect();
        if let Some(bounds) = &self.bounds {
            for (i, &(lo, hi)) in bounds.iter().enumerate() {
                if hi.is_finite() {
                    let mut a = vec![0.0; self.dim];
                    a[i] = 1.0;
                    rows.push(LinearConstraint::new(a, hi));
                }
                if lo.is_finite() {
                    let mut a = vec![0.0; self.dim];
                    a[i] = -1.0;
                    rows.push(LinearConstraint::new(a, -lo));
                }
            }
        }
        rows
    }

    pub fn equality_rows(&self) -> Vec<LinearConstraint> {
        self.equalities
            .iter()
            .map(|(a, b)| LinearConstraint::new(a.clone(), *b))
            .collect()
    }

    pub fn to_system(&self) -> ConstraintSystem {
        ConstraintSystem::new(self.dim, self.inequality_rows(), self.equality_rows())
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.to_system().max_violation(p) <= tol
    }
}

/// A real-valued function on `R^d` used as the filtration function.
///
/// Implementations must be deterministic and safe to call from several
/// threads at once.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, p: &[f64]) -> f64;

    /// Writes the analytic gradient into `out` and returns `true`, or returns
    /// `false` when no analytic gradient is available.
    fn gradient(&self, _p: &[f64], _out: &mut [f64]) -> bool {
        false
    }

    fn has_gradient(&self) -> bool {
        false
    }

    /// A known lower bound of the function over its whole domain.
    fn lower_bound(&self) -> Option<f64> {
        None
    }
}

impl<T: Objective + ?Sized> Objective for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, p: &[f64]) -> f64 {
        (**self).eval(p)
    }
    fn gradient(&self, p: &[f64], out: &mut [f64]) -> bool {
        (**self).gradient(p, out)
    }
    fn has_gradient(&self) -> bool {
        (**self).has_gradient()
    }
    fn lower_bound(&self) -> Option<f64> {
        (**self).lower_bound()
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, p: &[f64]) -> f64 {
        (**self).eval(p)
    }
    fn gradient(&self, p: &[f64], out: &mut [f64]) -> bool {
        (**self).gradient(p, out)
    }
    fn has_gradient(&self) -> bool {
        (**self).has_gradient()
    }
    fn lower_bound(&self) -> Option<f64> {
        (**self).lower_bound()
    }
}

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Objective assembled from closures.
pub struct FnObjective {
    dim: usize,
    eval: Box<EvalFn>,
    grad: Option<Box<GradFn>>,
    lower_bound: Option<f64>,
}

impl FnObjective {
    pub fn new(dim: usize, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FnObjective {
            dim,
            eval: Box::new(eval),
            grad: None,
            lower_bound: None,
        }
    }

    pub fn with_gradient(
        mut self,
        grad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Box::new(grad));
        self
    }

    pub fn with_lower_bound(mut self, bound: f64) -> Self {
        self.lower_bound = Some(bound);
        self
    }

    /// The constant zero function.
    pub fn zero(dim: usize) -> Self {
        FnObjective::new(dim, |_| 0.0)
            .with_gradient(|_, g| g.fill(0.0))
            .with_lower_bound(0.0)
    }
}

impl Objective for FnObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, p: &[f64]) -> f64 {
        (self.eval)(p)
    }

    fn gradient(&self, p: &[f64], out: &mut [f64]) -> bool {
        match &self.grad {
            Some(g) => {
                g(p, out);
                true
            }
            None => false,
        }
    }

    fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    fn lower_bound(&self) -> Option<f64> {
        self.lower_bound
    }
}

/// Numerical tolerances and effort knobs shared by the LP, the optimizer and
/// the complex builder.
#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceConfig {
    /// Slack threshold below which a polytope is declared empty.
    pub tol_feas: f64,
    /// Landmarks closer than this are duplicates.
    pub tol_dup: f64,
    /// Projected-gradient norm that counts as converged.
    pub tol_opt: f64,
    /// Local solves per cell.
    pub n_starts: usize,
    /// Highest simplex dimension built; `None` means the ambient dimension.
    pub max_dim: Option<usize>,
    /// Half-width of the box around the seed point that bounds the search on
    /// unbounded cells.
    pub trust_radius: f64,
    /// Iteration cap for a single local solve.
    pub max_iter: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            tol_feas: 1e-9,
            tol_dup: 1e-12,
            tol_opt: 1e-8,
            n_starts: 8,
            max_dim: None,
            trust_radius: 100.0,
            max_iter: 500,
        }
    }
}

impl ToleranceConfig {
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("tol_feas", self.tol_feas),
            ("tol_dup", self.tol_dup),
            ("tol_opt", self.tol_opt),
            ("trust_radius", self.trust_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.n_starts == 0 {
            return Err(Error::InvalidArgument("n_starts must be at least 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn max_dim_for(&self, ambient: usize) -> usize {
        self.max_dim.unwrap_or(ambient)
    }
}
