//! Dense linear programming over H-polytopes.
//!
//! Every LP here has free variables and a handful of dimensions, with up to a
//! few hundred rows. The solver is a two-phase tableau simplex using Bland's
//! rule; free variables are split into nonnegative parts. Large row sets are
//! handled by row generation: the LP is solved over a working subset of the
//! inequalities and the most violated remaining rows are added until the
//! relaxed optimum is feasible for the whole system.

use crate::error::{Error, Result};
use crate::types::{dot, norm};

/// One row `coeffs · p (≤ | =) rhs`; the relation is given by the list the
/// row lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<f64>, rhs: f64) -> Self {
        LinearConstraint { coeffs, rhs }
    }

    /// `coeffs · p - rhs`; positive values violate an inequality.
    pub fn residual(&self, p: &[f64]) -> f64 {
        dot(&self.coeffs, p) - self.rhs
    }
}

/// H-polytope `{p : A p ≤ b, E p = c}` in `R^dim`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSystem {
    dim: usize,
    inequalities: Vec<LinearConstraint>,
    equalities: Vec<LinearConstraint>,
}

impl ConstraintSystem {
    pub fn new(
        dim: usize,
        inequalities: Vec<LinearConstraint>,
        equalities: Vec<LinearConstraint>,
    ) -> Self {
        ConstraintSystem {
            dim,
            inequalities,
            equalities,
        }
    }

    pub fn unconstrained(dim: usize) -> Self {
        ConstraintSystem::new(dim, Vec::new(), Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inequalities(&self) -> &[LinearConstraint] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[LinearConstraint] {
        &self.equalities
    }

    pub fn push_inequality(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.inequalities.push(LinearConstraint::new(coeffs, rhs));
    }

    pub fn push_equality(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.equalities.push(LinearConstraint::new(coeffs, rhs));
    }

    pub fn extend_inequalities(&mut self, rows: impl IntoIterator<Item = LinearConstraint>) {
        self.inequalities.extend(rows);
    }

    pub fn extend_equalities(&mut self, rows: impl IntoIterator<Item = LinearConstraint>) {
        self.equalities.extend(rows);
    }

    /// Same system with extra inequality rows placed first.
    pub fn with_leading_inequalities(&self, rows: Vec<LinearConstraint>) -> Self {
        let mut inequalities = rows;
        inequalities.extend(self.inequalities.iter().cloned());
        ConstraintSystem::new(self.dim, inequalities, self.equalities.clone())
    }

    /// Same system with every inequality loosened by `margin` in distance
    /// units.
    pub fn relaxed(&self, margin: f64) -> Self {
        let inequalities = self
            .inequalities
            .iter()
            .map(|r| LinearConstraint::new(r.coeffs.clone(), r.rhs + margin * norm(&r.coeffs)))
            .collect();
        ConstraintSystem::new(self.dim, inequalities, self.equalities.clone())
    }

    pub fn check_dims(&self) -> Result<()> {
        for row in self.inequalities.iter().chain(&self.equalities) {
            if row.coeffs.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: row.coeffs.len(),
                });
            }
        }
        Ok(())
    }

    /// Largest constraint violation at `p` (0 when `p` is feasible).
    pub fn max_violation(&self, p: &[f64]) -> f64 {
        let ineq = self
            .inequalities
            .iter()
            .map(|r| r.residual(p).max(0.0))
            .fold(0.0, f64::max);
        let eq = self
            .equalities
            .iter()
            .map(|r| r.residual(p).abs())
            .fold(0.0, f64::max);
        ineq.max(eq)
    }

    /// Smallest normalized slack `(b_i - a_i·p) / ‖a_i‖` over the inequality
    /// rows (`+∞` when there are none).
    pub fn min_normalized_slack(&self, p: &[f64]) -> f64 {
        self.inequalities
            .iter()
            .filter_map(|r| {
                let n = norm(&r.coeffs);
                (n > 0.0).then(|| -r.residual(p) / n)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// A zero row with a negative right-hand side (or an inconsistent zero
    /// equality) can never be satisfied.
    pub fn is_trivially_infeasible(&self) -> bool {
        self.inequalities
            .iter()
            .any(|r| r.coeffs.iter().all(|&c| c == 0.0) && r.rhs < 0.0)
            || self
                .equalities
                .iter()
                .any(|r| r.coeffs.iter().all(|&c| c == 0.0) && r.rhs != 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub point: Option<Vec<f64>>,
    pub value: Option<f64>,
}

impl LpResult {
    fn infeasible() -> Self {
        LpResult {
            status: LpStatus::Infeasible,
            point: None,
            value: None,
        }
    }

    fn unbounded() -> Self {
        LpResult {
            status: LpStatus::Unbounded,
            point: None,
            value: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Optimizes `objective · p` over the system.
pub fn solve_lp(objective: &[f64], sense: Sense, system: &ConstraintSystem) -> Result<LpResult> {
    system.check_dims()?;
    if objective.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: objective.len(),
        });
    }
    if system.is_trivially_infeasible() {
        return Ok(LpResult::infeasible());
    }
    let d = system.dim();
    let sign = match sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let scale = objective.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let cost: Vec<f64> = if scale > 0.0 {
        objective.iter().map(|c| sign * c / scale).collect()
    } else {
        vec![0.0; d]
    };
    let rows = NormalizedRows::new(system, false);
    let res = rows.solve_generated(d, &cost, |_| 0.0)?;
    Ok(match res {
        Relaxed::Optimal(p) => {
            let value = dot(objective, &p[..d]);
            LpResult {
                status: LpStatus::Optimal,
                point: Some(p[..d].to_vec()),
                value: Some(value),
            }
        }
        Relaxed::Infeasible => LpResult::infeasible(),
        Relaxed::Unbounded => LpResult::unbounded(),
    })
}

/// Chebyshev-center style LP: maximize `s` subject to
/// `a_i·p + s‖a_i‖ ≤ b_i` for every inequality, all equalities exactly, and
/// `s ≤ 1`.
///
/// The returned `value` is the optimal slack `s`; the system is nonempty iff
/// `s ≥ -tol_feas`. `Infeasible` is returned only when no `p` satisfies the
/// equalities (or a zero row is violated), in which case no slack exists.
pub fn max_slack_point(system: &ConstraintSystem) -> Result<LpResult> {
    system.check_dims()?;
    if system.is_trivially_infeasible() {
        return Ok(LpResult::infeasible());
    }
    let d = system.dim();
    let rows = NormalizedRows::new(system, true);
    // Variables (p, u) with s = 1 - u, u ≥ 0; minimizing u maximizes s.
    let mut cost = vec![0.0; d + 1];
    cost[d] = 1.0;
    let res = rows.solve_generated(d + 1, &cost, |_| -1.0)?;
    Ok(match res {
        Relaxed::Optimal(x) => {
            let slack = 1.0 - x[d];
            LpResult {
                status: LpStatus::Optimal,
                point: Some(x[..d].to_vec()),
                value: Some(slack),
            }
        }
        Relaxed::Infeasible => LpResult::infeasible(),
        // min u with u ≥ 0 is bounded below
        Relaxed::Unbounded => unreachable!("slack LP is bounded"),
    })
}

/// Unit-normalized inequality rows plus scaled equalities, ready for the
/// simplex. Zero inequality rows (already known to be satisfiable) are
/// dropped.
struct NormalizedRows {
    dim: usize,
    ineq: Vec<(Vec<f64>, f64)>,
    eq: Vec<(Vec<f64>, f64)>,
    /// Whether the slack column takes part in the inequality rows.
    with_slack: bool,
}

enum Relaxed {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

const INITIAL_ROWS_PER_DIM: usize = 3;

impl NormalizedRows {
    fn new(system: &ConstraintSystem, with_slack: bool) -> Self {
        let ineq = system
            .inequalities()
            .iter()
            .filter_map(|r| {
                let n = norm(&r.coeffs);
                (n > 0.0).then(|| (r.coeffs.iter().map(|c| c / n).collect(), r.rhs / n))
            })
            .collect();
        let eq = system
            .equalities()
            .iter()
            .filter_map(|r| {
                let n = r.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
                (n > 0.0).then(|| (r.coeffs.iter().map(|c| c / n).collect(), r.rhs / n))
            })
            .collect();
        NormalizedRows {
            dim: system.dim(),
            ineq,
            eq,
            with_slack,
        }
    }

    /// Violation of inequality `i` at the extended point `x`.
    fn violation(&self, i: usize, x: &[f64]) -> f64 {
        let (a, b) = &self.ineq[i];
        let mut lhs = dot(a, &x[..self.dim]);
        if self.with_slack {
            lhs += 1.0 - x[self.dim];
        }
        lhs - b
    }

    /// Solves over a growing working set of inequality rows. `nvars` counts
    /// the free variables `p` plus the optional nonnegative slack variable.
    fn solve_generated(
        &self,
        nvars: usize,
        cost: &[f64],
        slack_coeff: impl Fn(usize) -> f64,
    ) -> Result<Relaxed> {
        let m = self.ineq.len();
        let initial = INITIAL_ROWS_PER_DIM * (self.dim + 1);
        if m <= initial + self.dim {
            let all: Vec<usize> = (0..m).collect();
            return self.solve_subset(nvars, cost, &all, &slack_coeff);
        }
        let mut working: Vec<usize> = (0..initial).collect();
        let mut in_working = vec![false; m];
        for &i in &working {
            in_working[i] = true;
        }
        loop {
            let res = self.solve_subset(nvars, cost, &working, &slack_coeff)?;
            let x = match res {
                Relaxed::Optimal(x) => x,
                Relaxed::Infeasible => return Ok(Relaxed::Infeasible),
                Relaxed::Unbounded => {
                    let all: Vec<usize> = (0..m).collect();
                    return self.solve_subset(nvars, cost, &all, &slack_coeff);
                }
            };
            let mut violated: Vec<(f64, usize)> = (0..m)
                .filter(|&i| !in_working[i])
                .filter_map(|i| {
                    let v = self.violation(i, &x);
                    (v > ROW_GEN_TOL).then_some((v, i))
                })
                .collect();
            if violated.is_empty() {
                return Ok(Relaxed::Optimal(x));
            }
            violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            for &(_, i) in violated.iter().take(self.dim + 1) {
                in_working[i] = true;
                working.push(i);
            }
            working.sort_unstable();
        }
    }

    fn solve_subset(
        &self,
        nvars: usize,
        cost: &[f64],
        rows: &[usize],
        slack_coeff: &impl Fn(usize) -> f64,
    ) -> Result<Relaxed> {
        let d = self.dim;
        let extra = nvars - d;
        // Standard-form columns: p⁺ (d), p⁻ (d), then the `extra` variables.
        let ncols = 2 * d + extra;
        let mut std_rows = Vec::with_capacity(rows.len() + self.eq.len());
        for &i in rows {
            let (a, b) = &self.ineq[i];
            let mut coeffs = Vec::with_capacity(ncols);
            coeffs.extend_from_slice(a);
            coeffs.extend(a.iter().map(|c| -c));
            let mut rhs = *b;
            if extra > 0 {
                coeffs.push(slack_coeff(i));
                rhs -= 1.0;
            }
            std_rows.push(StdRow {
                coeffs,
                rhs,
                equality: false,
            });
        }
        for (e, c) in &self.eq {
            let mut coeffs = Vec::with_capacity(ncols);
            coeffs.extend_from_slice(e);
            coeffs.extend(e.iter().map(|v| -v));
            coeffs.extend(std::iter::repeat_n(0.0, extra));
            std_rows.push(StdRow {
                coeffs,
                rhs: *c,
                equality: true,
            });
        }
        let mut std_cost = Vec::with_capacity(ncols);
        std_cost.extend_from_slice(&cost[..d]);
        std_cost.extend(cost[..d].iter().map(|c| -c));
        std_cost.extend_from_slice(&cost[d..]);

        Ok(match simplex(&std_cost, &std_rows)? {
            Standard::Optimal(y) => {
                let mut x: Vec<f64> = (0..d).map(|j| y[j] - y[d + j]).collect();
                x.extend_from_slice(&y[2 * d..]);
                Relaxed::Optimal(x)
            }
            Standard::Infeasible => Relaxed::Infeasible,
            Standard::Unbounded => Relaxed::Unbounded,
        })
    }
}

const ROW_GEN_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-11;
const PHASE1_TOL: f64 = 1e-9;
const RAY_COST_TOL: f64 = 1e-8;

struct StdRow {
    coeffs: Vec<f64>,
    rhs: f64,
    equality: bool,
}

enum Standard {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

/// Dense tableau. Row `m` is the objective row holding reduced costs, the
/// last column holds right-hand sides (`-z` in the objective row).
struct Tableau {
    m: usize,
    width: usize,
    a: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
    max_pivots: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.width + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.a[r * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let inv = 1.0 / self.a[r * w + c];
        for v in &mut self.a[r * w..(r + 1) * w] {
            *v *= inv;
        }
        self.a[r * w + c] = 1.0;
        let (before, rest) = self.a.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let update = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
                row[c] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(update);
        after.chunks_exact_mut(w).for_each(update);
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Runs Bland's rule on the current objective row over columns
    /// `0..ncols`. Returns `false` on an unbounded ray.
    fn optimize(&mut self, ncols: usize) -> Result<bool> {
        let m = self.m;
        loop {
            if self.pivots > self.max_pivots {
                return Err(Error::SolverStalled {
                    pivots: self.pivots,
                });
            }
            let Some(enter) = (0..ncols).find(|&j| self.at(m, j) < -COST_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let coef = self.at(r, enter);
                if coef > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / coef;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                            if ratio < lratio && !tie
                                || tie && self.basis[r] < self.basis[lr]
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                // A rounding-level reduced cost (typically on the mirror of a
                // basic split variable) is not a genuine ray.
                None if self.at(m, enter) > -RAY_COST_TOL => {
                    let w = self.width;
                    self.a[m * w + enter] = 0.0;
                }
                None => return Ok(false),
            }
        }
    }
}

/// Two-phase simplex for `min cost·y` over `rows`, `y ≥ 0`.
fn simplex(cost: &[f64], rows: &[StdRow]) -> Result<Standard> {
    let nstruct = cost.len();
    let m = rows.len();
    let nslack = rows.iter().filter(|r| !r.equality).count();
    let needs_art: Vec<bool> = rows
        .iter()
        .map(|r| r.equality || r.rhs < 0.0)
        .collect();
    let nart = needs_art.iter().filter(|&&b| b).count();
    let art_start = nstruct + nslack;
    let ncols = art_start + nart;
    let width = ncols + 1;

    let mut t = Tableau {
        m,
        width,
        a: vec![0.0; (m + 1) * width],
        basis: vec![0; m],
        pivots: 0,
        max_pivots: 50 * (m + ncols) + 1000,
    };
    let mut slack_col = nstruct;
    let mut art_col = art_start;
    for (r, row) in rows.iter().enumerate() {
        let flip = if row.rhs < 0.0 { -1.0 } else { 1.0 };
        let base = r * width;
        for (j, &c) in row.coeffs.iter().enumerate() {
            t.a[base + j] = flip * c;
        }
        t.a[base + width - 1] = flip * row.rhs;
        if !row.equality {
            t.a[base + slack_col] = flip;
            if !needs_art[r] {
                t.basis[r] = slack_col;
            }
            slack_col += 1;
        }
        if needs_art[r] {
            t.a[base + art_col] = 1.0;
            t.basis[r] = art_col;
            art_col += 1;
        }
    }

    if nart > 0 {
        // Phase 1: minimize the sum of artificials.
        let obj = m * width;
        for r in 0..m {
            if needs_art[r] {
                for j in 0..art_start {
                    t.a[obj + j] -= t.a[r * width + j];
                }
                t.a[obj + width - 1] -= t.a[r * width + width - 1];
            }
        }
        t.optimize(ncols)?;
        let infeas = -t.rhs(m);
        let scale = rows.iter().fold(1.0f64, |s, r| s.max(r.rhs.abs()));
        if infeas > PHASE1_TOL * scale {
            return Ok(Standard::Infeasible);
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut keep = vec![true; m];
        for r in 0..m {
            if t.basis[r] >= art_start {
                let col = (0..art_start)
                    .filter(|&j| t.at(r, j).abs() > 1e-9)
                    .max_by(|&x, &y| t.at(r, x).abs().total_cmp(&t.at(r, y).abs()));
                match col {
                    Some(j) => t.pivot(r, j),
                    None => keep[r] = false,
                }
            }
        }
        if keep.iter().any(|k| !k) {
            let mut a = Vec::with_capacity(t.a.len());
            let mut basis = Vec::new();
            for r in 0..m {
                if keep[r] {
                    a.extend_from_slice(&t.a[r * width..(r + 1) * width]);
                    basis.push(t.basis[r]);
                }
            }
            a.extend_from_slice(&t.a[m * width..(m + 1) * width]);
            t.m = basis.len();
            t.a = a;
            t.basis = basis;
        }
    }

    // Phase 2 objective row.
    let m = t.m;
    let obj = m * width;
    t.a[obj..obj + width].fill(0.0);
    t.a[obj..obj + nstruct].copy_from_slice(cost);
    for r in 0..m {
        let b = t.basis[r];
        let cb = if b < nstruct { cost[b] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..width {
                t.a[obj + j] -= cb * t.a[r * width + j];
            }
        }
    }
    // Artificial columns never re-enter.
    if !t.optimize(art_start)? {
        return Ok(Standard::Unbounded);
    }
    let mut y = vec![0.0; nstruct];
    for r in 0..m {
        let b = t.basis[r];
        if b < nstruct {
            y[b] = t.rhs(r).max(0.0);
        }
    }
    Ok(Standard::Optimal(y))
}
