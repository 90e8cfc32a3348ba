//! Euclidean projection onto an H-polytope.
//!
//! Dual active-set method of Goldfarb and Idnani specialised to the identity
//! Hessian: starting from the unconstrained minimizer (the point itself),
//! violated constraints are added one at a time while dual feasibility is
//! maintained, dropping constraints whose multiplier would turn negative.
//! The active normals are kept as a Gram–Schmidt factorization `N = Q R`,
//! rebuilt on every change since at most `d` constraints are active.

use crate::error::{Error, Result};
use crate::lp::ConstraintSystem;
use crate::types::{dot, norm};

const DEPENDENT_TOL: f64 = 1e-8;

/// Normalized rows in `n·x ≥ b` form.
#[derive(Debug, Clone)]
pub struct Projector {
    dim: usize,
    normals: Vec<f64>,
    rhs: Vec<f64>,
    n_eq: usize,
}

struct Active {
    rows: Vec<usize>,
    /// Sign applied to each active row (equalities may enter flipped).
    signs: Vec<f64>,
    mult: Vec<f64>,
    q: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
}

impl Projector {
    pub fn new(system: &ConstraintSystem) -> Result<Self> {
        system.check_dims()?;
        if system.is_trivially_infeasible() {
            return Err(Error::ProjectionFailed("system is infeasible".into()));
        }
        let dim = system.dim();
        let mut normals = Vec::new();
        let mut rhs = Vec::new();
        // Equalities first, stored with their natural sign.
        let mut n_eq = 0;
        for row in system.equalities() {
            let n = norm(&row.coeffs);
            if n > 0.0 {
                normals.extend(row.coeffs.iter().map(|c| c / n));
                rhs.push(row.rhs / n);
                n_eq += 1;
            }
        }
        for row in system.inequalities() {
            let n = norm(&row.coeffs);
            if n > 0.0 {
                normals.extend(row.coeffs.iter().map(|c| -c / n));
                rhs.push(-row.rhs / n);
            }
        }
        Ok(Projector {
            dim,
            normals,
            rhs,
            n_eq,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn rows(&self) -> usize {
        self.rhs.len()
    }

    #[inline]
    fn normal(&self, i: usize) -> &[f64] {
        &self.normals[i * self.dim..(i + 1) * self.dim]
    }

    /// `n_i·x − b_i`: negative when an inequality is violated.
    #[inline]
    fn value(&self, i: usize, x: &[f64]) -> f64 {
        dot(self.normal(i), x) - self.rhs[i]
    }

    fn tol(&self, i: usize) -> f64 {
        1e-11 * (1.0 + self.rhs[i].abs())
    }

    /// Largest violation of any row at `x`, in distance units.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        (0..self.rows())
            .map(|i| {
                let v = self.value(i, x);
                if i < self.n_eq {
                    v.abs()
                } else {
                    (-v).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    fn is_feasible(&self, x: &[f64]) -> bool {
        (0..self.rows()).all(|i| {
            let v = self.value(i, x);
            if i < self.n_eq {
                v.abs() <= self.tol(i)
            } else {
                v >= -self.tol(i)
            }
        })
    }

    fn refactor(&self, act: &mut Active) {
        act.q.clear();
        act.r.clear();
        let k = act.rows.len();
        for c in 0..k {
            let mut v: Vec<f64> = self
                .normal(act.rows[c])
                .iter()
                .map(|x| x * act.signs[c])
                .collect();
            let mut rcol = vec![0.0; k];
            // Two Gram–Schmidt passes keep Q orthogonal to working precision.
            for _ in 0..2 {
                for (l, ql) in act.q.iter().enumerate() {
                    let proj = dot(ql, &v);
                    rcol[l] += proj;
                    for (vi, qi) in v.iter_mut().zip(ql) {
                        *vi -= proj * qi;
                    }
                }
            }
            let nv = norm(&v);
            rcol[c] = nv;
            for vi in &mut v {
                *vi /= nv;
            }
            act.q.push(v);
            act.r.push(rcol);
        }
    }

    /// Primal direction `z` (component of `n` orthogonal to the active
    /// normals) and dual direction `r` (coordinates of the parallel part).
    fn directions(&self, act: &Active, n: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let k = act.rows.len();
        let mut w = vec![0.0; k];
        let mut z = n.to_vec();
        for _ in 0..2 {
            for (ql, wl) in act.q.iter().zip(w.iter_mut()) {
                let c = dot(ql, &z);
                *wl += c;
                for (zi, qi) in z.iter_mut().zip(ql) {
                    *zi -= c * qi;
                }
            }
        }
        // Back-substitution R r = w; act.r[c][l] holds R[l][c].
        let mut r = vec![0.0; k];
        for l in (0..k).rev() {
            let mut s = w[l];
            for c in l + 1..k {
                s -= act.r[c][l] * r[c];
            }
            r[l] = s / act.r[l][l];
        }
        (z, r)
    }

    fn drop(&self, act: &mut Active, pos: usize) {
        act.rows.remove(pos);
        act.signs.remove(pos);
        act.mult.remove(pos);
        self.refactor(act);
    }

    /// Adds row `p` (with `sign`) to the active set, moving `x` until the row
    /// holds with equality. Returns `false` when the system is infeasible.
    fn add(&self, act: &mut Active, x: &mut [f64], p: usize, sign: f64, budget: &mut usize) -> Result<bool> {
        let n: Vec<f64> = self.normal(p).iter().map(|v| v * sign).collect();
        let mut up = 0.0;
        loop {
            if *budget == 0 {
                return Err(Error::ProjectionFailed("iteration budget exhausted".into()));
            }
            *budget -= 1;
            let s = sign * self.value(p, x);
            let (z, r) = self.directions(act, &n);
            let zn = norm(&z);
            // Partial step limited by inequality multipliers.
            let mut t1 = f64::INFINITY;
            let mut drop_at = None;
            for (pos, (&row, &rj)) in act.rows.iter().zip(&r).enumerate() {
                if row >= self.n_eq && rj > 0.0 {
                    let ratio = act.mult[pos] / rj;
                    if ratio < t1 {
                        t1 = ratio;
                        drop_at = Some(pos);
                    }
                }
            }
            let t2 = if zn > DEPENDENT_TOL {
                (-s / (zn * zn)).max(0.0)
            } else {
                f64::INFINITY
            };
            let t = t1.min(t2);
            if t.is_infinite() {
                // `n` is dependent on the active normals and no multiplier can
                // absorb it: either the row is already implied or infeasible.
                return Ok(s.abs() <= 1e-9 * (1.0 + self.rhs[p].abs()));
            }
            if t2.is_finite() {
                for (xi, zi) in x.iter_mut().zip(&z) {
                    *xi += t * zi;
                }
            }
            for (m, rj) in act.mult.iter_mut().zip(&r) {
                *m -= t * rj;
            }
            up += t;
            if t2 <= t1 {
                act.rows.push(p);
                act.signs.push(sign);
                act.mult.push(up);
                self.refactor(act);
                return Ok(true);
            }
            self.drop(act, drop_at.expect("partial step has a blocking row"));
        }
    }

    /// The closest point of the polytope to `q`.
    pub fn project(&self, q: &[f64]) -> Result<Vec<f64>> {
        let mut x = q.to_vec();
        if self.is_feasible(&x) {
            return Ok(x);
        }
        let mut act = Active {
            rows: Vec::with_capacity(self.dim),
            signs: Vec::with_capacity(self.dim),
            mult: Vec::with_capacity(self.dim),
            q: Vec::with_capacity(self.dim),
            r: Vec::with_capacity(self.dim),
        };
        let mut budget = 20 * (self.rows() + self.dim) + 100;
        for p in 0..self.n_eq {
            let v = self.value(p, &x);
            let sign = if v > 0.0 { -1.0 } else { 1.0 };
            if !self.add(&mut act, &mut x, p, sign, &mut budget)? {
                return Err(Error::ProjectionFailed("inconsistent equalities".into()));
            }
        }
        loop {
            let mut worst = None;
            let mut worst_v = 0.0;
            for i in self.n_eq..self.rows() {
                let v = self.value(i, &x);
                if v < -self.tol(i) && v < worst_v && !act.rows.contains(&i) {
                    worst_v = v;
                    worst = Some(i);
                }
            }
            let Some(p) = worst else {
                return Ok(x);
            };
            if !self.add(&mut act, &mut x, p, 1.0, &mut budget)? {
                return Err(Error::ProjectionFailed("polytope is empty".into()));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LinearConstraint;

    fn square() -> ConstraintSystem {
        ConstraintSystem::new(
            2,
            vec![
                LinearConstraint::new(vec![1.0, 0.0], 1.0),
                LinearConstraint::new(vec![-1.0, 0.0], 0.0),
                LinearConstraint::new(vec![0.0, 1.0], 1.0),
                LinearConstraint::new(vec![0.0, -1.0], 0.0),
            ],
            vec![],
        )
    }

    #[test]
    fn projects_onto_square() {
        let p = Projector::new(&square()).unwrap();
        let x = p.project(&[2.0, 0.5]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
        let x = p.project(&[3.0, -2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1].abs() < 1e-12);
        let x = p.project(&[0.3, 0.4]).unwrap();
        assert_eq!(x, vec![0.3, 0.4]);
    }

    #[test]
    fn projection_with_equality() {
        // x + y = 1, x ≥ 0.8
        let s = ConstraintSystem::new(
            2,
            vec![LinearConstraint::new(vec![-1.0, 0.0], -0.8)],
            vec![LinearConstraint::new(vec![1.0, 1.0], 1.0)],
        );
        let p = Projector::new(&s).unwrap();
        let x = p.project(&[0.0, 0.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn wedge_apex() {
        // y ≥ |x| projected from below lands on the apex.
        let s = ConstraintSystem::new(
            2,
            vec![
                LinearConstraint::new(vec![1.0, -1.0], 0.0),
                LinearConstraint::new(vec![-1.0, -1.0], 0.0),
            ],
            vec![],
        );
        let p = Projector::new(&s).unwrap();
        let x = p.project(&[0.1, -5.0]).unwrap();
        assert!(x[0].abs() < 1e-12 && x[1].abs() < 1e-12);
    }

    #[test]
    fn empty_polytope_fails() {
        let s = ConstraintSystem::new(
            1,
            vec![
                LinearConstraint::new(vec![1.0], 0.0),
                LinearConstraint::new(vec![-1.0], -1.0),
            ],
            vec![],
        );
        let p = Projector::new(&s).unwrap();
        assert!(p.project(&[5.0]).is_err());
    }

    #[test]
    fn degenerate_single_point() {
        // Four lines through (0.5, 0.5) bounding a single point.
        let s = ConstraintSystem::new(
            2,
            vec![
                LinearConstraint::new(vec![1.0, 1.0], 1.0),
                LinearConstraint::new(vec![-1.0, -1.0], -1.0),
                LinearConstraint::new(vec![1.0, -1.0], 0.0),
                LinearConstraint::new(vec![-1.0, 1.0], 0.0),
                LinearConstraint::new(vec![1.0, 0.0], 0.5),
            ],
            vec![],
        );
        let p = Projector::new(&s).unwrap();
        let x = p.project(&[3.0, -1.0]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-9 && (x[1] - 0.5).abs() < 1e-9);
    }
}
