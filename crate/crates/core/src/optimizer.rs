//! Minimization of an objective over a convex cell.
//!
//! Each local solve is a projected-gradient descent: the trial point
//! `x − α∇f` is projected back onto the cell, `α` follows a safeguarded
//! Barzilai–Borwein rule, and an Armijo backtracking search runs along the
//! segment from `x` to the projected trial point. Several starts are run per
//! cell and the best result kept.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::lp::{max_slack_point, solve_lp, ConstraintSystem, LinearConstraint, LpStatus, Sense};
use crate::projection::Projector;
use crate::types::{dot, norm, Objective, ToleranceConfig};

const ARMIJO: f64 = 1e-4;
const ALPHA_MIN: f64 = 1e-12;
const ALPHA_MAX: f64 = 1e12;
const STALL_ITERS: usize = 8;
const RELAX_MARGIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfimumStatus {
    Attained,
    /// The cell is unbounded, the objective declares no lower bound and the
    /// best point sits on the search box with descent still available.
    PossiblyUnbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub value: f64,
    pub argmin: Vec<f64>,
    pub starts_used: usize,
    pub converged: bool,
    pub status: InfimumStatus,
}

/// Gradient of `objective` at `p`: analytic when available, otherwise
/// central differences with step `1e-6·(1 + ‖p‖)`.
pub fn gradient(objective: &dyn Objective, p: &[f64], out: &mut [f64]) -> Result<()> {
    if objective.gradient(p, out) {
        if out.iter().all(|g| g.is_finite()) {
            return Ok(());
        }
        return Err(Error::ObjectiveEvaluation { point: p.to_vec() });
    }
    let h = 1e-6 * (1.0 + norm(p));
    let mut x = p.to_vec();
    for i in 0..p.len() {
        x[i] = p[i] + h;
        let fp = objective.eval(&x);
        x[i] = p[i] - h;
        let fm = objective.eval(&x);
        x[i] = p[i];
        let g = (fp - fm) / (2.0 * h);
        if !g.is_finite() {
            return Err(Error::ObjectiveEvaluation { point: p.to_vec() });
        }
        out[i] = g;
    }
    Ok(())
}

fn eval(objective: &dyn Objective, p: &[f64]) -> Result<f64> {
    let v = objective.eval(p);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::ObjectiveEvaluation { point: p.to_vec() })
    }
}

struct LocalResult {
    x: Vec<f64>,
    f: f64,
    converged: bool,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `P(x − α g) − x`.
fn projected_step(proj: &Projector, x: &[f64], g: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let trial: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - alpha * gi).collect();
    Ok(sub(&proj.project(&trial)?, x))
}

fn local_solve(
    objective: &dyn Objective,
    proj: &Projector,
    start: Vec<f64>,
    tol: &ToleranceConfig,
) -> Result<LocalResult> {
    let d = start.len();
    let mut x = start;
    let mut f = eval(objective, &x)?;
    let mut g = vec![0.0; d];
    gradient(objective, &x, &mut g)?;
    let mut converged = false;

    // A failed projection ends the descent at the last feasible iterate.
    let Ok(first) = projected_step(proj, &x, &g, 1.0) else {
        return Ok(LocalResult { x, f, converged: false });
    };
    let first_norm = first.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm(&first) <= tol.tol_opt {
        return Ok(LocalResult { x, f, converged: true });
    }
    let mut alpha = (1.0 / first_norm).clamp(ALPHA_MIN, ALPHA_MAX);
    let mut g_new = vec![0.0; d];
    let mut stall = 0;

    for _ in 0..tol.max_iter {
        let Ok(pg) = projected_step(proj, &x, &g, 1.0) else {
            break;
        };
        if norm(&pg) <= tol.tol_opt {
            converged = true;
            break;
        }
        // Trial points far outside the search box only cost precision.
        let reach = 4.0 * tol.trust_radius * (d as f64).sqrt();
        alpha = alpha.min(reach / norm(&g).max(f64::MIN_POSITIVE));
        let Ok(dir) = projected_step(proj, &x, &g, alpha) else {
            break;
        };
        let slope = dot(&g, &dir);
        if !(slope < 0.0) {
            break;
        }
        let mut t = 1.0;
        let (x_new, f_new) = loop {
            let xt: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
            let ft = eval(objective, &xt)?;
            if ft <= f + ARMIJO * t * slope {
                break (xt, ft);
            }
            // Safeguarded quadratic interpolation.
            let tq = -slope * t * t / (2.0 * (ft - f - slope * t));
            t = if tq.is_finite() { tq.clamp(0.1 * t, 0.5 * t) } else { 0.5 * t };
            if t < 1e-14 {
                return Ok(LocalResult { x, f, converged });
            }
        };
        gradient(objective, &x_new, &mut g_new)?;
        let s = sub(&x_new, &x);
        let y = sub(&g_new, &g);
        let sy = dot(&s, &y);
        alpha = if sy > 0.0 {
            (dot(&s, &s) / sy).clamp(ALPHA_MIN, ALPHA_MAX)
        } else {
            ALPHA_MAX
        };
        if f - f_new <= 1e-15 * (1.0 + f.abs()) {
            stall += 1;
        } else {
            stall = 0;
        }
        x = x_new;
        f = f_new;
        std::mem::swap(&mut g, &mut g_new);
        if stall >= STALL_ITERS {
            break;
        }
    }
    Ok(LocalResult { x, f, converged })
}

fn trust_rows(center: &[f64], radius: f64) -> Vec<LinearConstraint> {
    let d = center.len();
    let mut rows = Vec::with_capacity(2 * d);
    for (i, &c) in center.iter().enumerate() {
        let mut up = vec![0.0; d];
        up[i] = 1.0;
        rows.push(LinearConstraint::new(up, c + radius));
        let mut down = vec![0.0; d];
        down[i] = -1.0;
        rows.push(LinearConstraint::new(down, -(c - radius)));
    }
    rows
}

/// Start points: the seed and any hints, then random convex combinations of
/// LP vertices. The vertices are the extremes along each coordinate axis,
/// then along random directions. The vertex pool is only built once a
/// random start is requested.
struct Starts<'a> {
    work: &'a ConstraintSystem,
    proj: &'a Projector,
    seed: &'a [f64],
    hints: &'a [Vec<f64>],
    n_starts: usize,
    issued: usize,
    pool: Option<Vec<Vec<f64>>>,
    rng: ChaCha8Rng,
}

impl<'a> Starts<'a> {
    fn new(
        work: &'a ConstraintSystem,
        proj: &'a Projector,
        seed: &'a [f64],
        hints: &'a [Vec<f64>],
        n_starts: usize,
        rng_seed: u64,
    ) -> Self {
        Starts {
            work,
            proj,
            seed,
            hints,
            n_starts,
            issued: 0,
            pool: None,
            rng: ChaCha8Rng::seed_from_u64(rng_seed),
        }
    }

    fn vertex_pool(&mut self) -> Result<Vec<Vec<f64>>> {
        let d = self.seed.len();
        let size = (self.n_starts - 1).min(4 * d).max(1);
        let mut pool = Vec::with_capacity(size);
        for k in 0..size {
            let dir: Vec<f64> = if k < 2 * d {
                let mut e = vec![0.0; d];
                e[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
                e
            } else {
                (0..d).map(|_| self.rng.sample(StandardNormal)).collect()
            };
            let res = solve_lp(&dir, Sense::Minimize, self.work)?;
            if res.status == LpStatus::Optimal {
                pool.push(res.point.expect("optimal LP has a point"));
            }
        }
        Ok(pool)
    }

    /// The next start, `None` when exhausted. Starts whose projection fails
    /// are skipped.
    fn next(&mut self) -> Result<Option<Vec<f64>>> {
        while self.issued < self.n_starts {
            self.issued += 1;
            let fixed = match self.issued {
                1 => Some(self.seed),
                i => self.hints.get(i - 2).map(Vec::as_slice),
            };
            if let Some(q) = fixed {
                match self.proj.project(q) {
                    Ok(p) => return Ok(Some(p)),
                    Err(_) => continue,
                }
            }
            if self.pool.is_none() {
                self.pool = Some(self.vertex_pool()?);
            }
            let pool = self.pool.as_ref().expect("pool was just built");
            if pool.is_empty() {
                return Ok(None);
            }
            let d = self.seed.len();
            let k = 1 + self.rng.random_range(0..pool.len().min(d + 1));
            let mut chosen: Vec<usize> = (0..pool.len()).collect();
            for i in 0..k {
                let j = self.rng.random_range(i..chosen.len());
                chosen.swap(i, j);
            }
            let weights: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut self.rng)).collect();
            let total: f64 = weights.iter().sum();
            let mut p = vec![0.0; d];
            for (w, &idx) in weights.iter().zip(&chosen[..k]) {
                for (pi, vi) in p.iter_mut().zip(&pool[idx]) {
                    *pi += w / total * vi;
                }
            }
            if let Ok(p) = self.proj.project(&p) {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }
}

/// `inf f` over a nonempty cell, estimated by multi-start local descent.
pub fn minimize_over_cell(
    objective: &dyn Objective,
    system: &ConstraintSystem,
    tol: &ToleranceConfig,
    rng_seed: u64,
) -> Result<MinimizeResult> {
    minimize_with_seed(objective, system, None, tol, rng_seed)
}

/// As [`minimize_over_cell`], reusing an interior seed point (typically the
/// witness of the nonemptiness test) instead of solving for one.
pub fn minimize_with_seed(
    objective: &dyn Objective,
    system: &ConstraintSystem,
    seed_point: Option<&[f64]>,
    tol: &ToleranceConfig,
    rng_seed: u64,
) -> Result<MinimizeResult> {
    let r = minimize_above(objective, system, seed_point, &[], tol, rng_seed, f64::NEG_INFINITY)?;
    Ok(r.expect("no start can reach -inf"))
}

/// As [`minimize_with_seed`], but gives up and returns `None` as soon as a
/// start reaches `stop_at` or below. Used when only values above a known
/// floor matter. Values within a relative `tol.tol_opt` of `stop_at` count as
/// reaching it.
///
/// `hints` are tried, after projection onto the cell, as the starts following
/// the seed; they count towards `n_starts`.
pub fn minimize_above(
    objective: &dyn Objective,
    system: &ConstraintSystem,
    seed_point: Option<&[f64]>,
    hints: &[Vec<f64>],
    tol: &ToleranceConfig,
    rng_seed: u64,
    stop_at: f64,
) -> Result<Option<MinimizeResult>> {
    system.check_dims()?;
    if objective.dim() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: objective.dim(),
        });
    }
    let seed = match seed_point {
        Some(p) => p.to_vec(),
        None => {
            let res = max_slack_point(system)?;
            match (res.status, res.point) {
                (LpStatus::Optimal, Some(p)) if res.value.unwrap_or(-1.0) >= -tol.tol_feas => p,
                _ => return Err(Error::StartGenerationFailed),
            }
        }
    };
    // A cell accepted within `tol_feas` may be empty in exact arithmetic;
    // loosen it just enough to contain the seed.
    let deficit = -system.min_normalized_slack(&seed);
    let relaxed;
    let system = if deficit > 0.0 {
        relaxed = system.relaxed(deficit + RELAX_MARGIN);
        &relaxed
    } else {
        system
    };
    let work = system.with_leading_inequalities(trust_rows(&seed, tol.trust_radius));
    let proj = Projector::new(&work)?;
    let mut starts = Starts::new(&work, &proj, &seed, hints, tol.n_starts, rng_seed);

    let stop_at = stop_at + tol.tol_opt * stop_at.abs().max(1.0);
    let mut best: Option<LocalResult> = None;
    let mut any_converged = false;
    while let Some(start) = starts.next().map_err(|_| Error::StartGenerationFailed)? {
        let r = local_solve(objective, &proj, start, tol)?;
        any_converged |= r.converged;
        if best.as_ref().is_none_or(|b| r.f < b.f) {
            best = Some(r);
        }
        if best.as_ref().is_some_and(|b| b.f <= stop_at) {
            return Ok(None);
        }
    }
    let best = best.ok_or(Error::StartGenerationFailed)?;
    let status = classify(objective, system, &seed, &best.x, tol)?;
    Ok(Some(MinimizeResult {
        value: best.f,
        argmin: best.x,
        starts_used: starts.issued,
        converged: any_converged,
        status,
    }))
}

/// Decides whether a minimizer found inside the search box stands for an
/// unbounded infimum.
fn classify(
    objective: &dyn Objective,
    system: &ConstraintSystem,
    center: &[f64],
    x: &[f64],
    tol: &ToleranceConfig,
) -> Result<InfimumStatus> {
    if objective.lower_bound().is_some() {
        return Ok(InfimumStatus::Attained);
    }
    let edge = tol.trust_radius * (1.0 - 1e-6);
    let on_box = x.iter().zip(center).any(|(xi, ci)| (xi - ci).abs() >= edge);
    if !on_box {
        return Ok(InfimumStatus::Attained);
    }
    // Descent available in the cell without the box?
    let mut g = vec![0.0; x.len()];
    gradient(objective, x, &mut g)?;
    let gn = norm(&g);
    if gn == 0.0 {
        return Ok(InfimumStatus::Attained);
    }
    let proj = Projector::new(system)?;
    let step = projected_step(&proj, x, &g, 1.0 / gn)?;
    if norm(&step) > 1e-6 && dot(&g, &step) < 0.0 {
        Ok(InfimumStatus::PossiblyUnbounded)
    } else {
        Ok(InfimumStatus::Attained)
    }
}

/// Whether the infimum of `objective` over the (nonempty) cell is attained or
/// possibly `-∞`.
pub fn infimum_status(
    objective: &dyn Objective,
    system: &ConstraintSystem,
    tol: &ToleranceConfig,
) -> Result<InfimumStatus> {
    if objective.lower_bound().is_some() {
        return Ok(InfimumStatus::Attained);
    }
    if is_bounded(system)? {
        return Ok(InfimumStatus::Attained);
    }
    Ok(minimize_over_cell(objective, system, tol, 0)?.status)
}

/// Whether every coordinate is bounded on the (nonempty) polytope.
pub fn is_bounded(system: &ConstraintSystem) -> Result<bool> {
    let d = system.dim();
    for i in 0..d {
        for sign in [1.0, -1.0] {
            let mut c = vec![0.0; d];
            c[i] = sign;
            if solve_lp(&c, Sense::Minimize, system)?.status == LpStatus::Unbounded {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
