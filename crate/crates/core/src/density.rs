//! Adaptive Gaussian density estimate and landmark selection.
//!
//! Each data point `z_i` carries a kernel `ρ_i(z) = exp(−β_i‖z − z_i‖²)`
//! whose bandwidth is fixed by requiring `Σ_j ρ_i(z_j) = h`. The density is
//! `ρ(z) = (hN)⁻¹ Σ_i ρ_i(z)` and the filtration function is `−log ρ`.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::types::{dist_sq, LandmarkSet, Objective};

const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityModel {
    pub data: Vec<Vec<f64>>,
    pub h: f64,
    pub betas: Vec<f64>,
}

impl DensityModel {
    pub fn dim(&self) -> usize {
        self.data[0].len()
    }

    /// `Σ_j exp(−β_i‖z_j − z_i‖²) − h` for data point `i`.
    pub fn residual(&self, i: usize) -> f64 {
        kernel_sum(&self.data, i, self.betas[i]) - self.h
    }

    /// `ρ(z)`.
    pub fn density(&self, z: &[f64]) -> f64 {
        let n = self.data.len() as f64;
        self.data
            .iter()
            .zip(&self.betas)
            .map(|(zi, b)| (-b * dist_sq(z, zi)).exp())
            .sum::<f64>()
            / (self.h * n)
    }
}

fn kernel_sum(data: &[Vec<f64>], i: usize, beta: f64) -> f64 {
    data.iter()
        .map(|zj| (-beta * dist_sq(zj, &data[i])).exp())
        .sum()
}

/// Solves `S(β) = h` for the strictly decreasing `S(β) = Σ_j exp(−β D_j)`.
fn solve_beta(sq_dists: &[f64], h: f64) -> Result<f64> {
    let s = |beta: f64| sq_dists.iter().map(|d| (-beta * d).exp()).sum::<f64>();
    let zeros = sq_dists.iter().filter(|&&d| d == 0.0).count() as f64;
    if h <= zeros {
        return Err(Error::DegenerateData(format!(
            "{} coincident points make the kernel sum exceed h = {h}",
            zeros as usize
        )));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    if s(hi) > h {
        while s(hi) > h {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::DegenerateData("bandwidth bracket diverged".into()));
            }
        }
    } else {
        lo = 1.0;
        while s(lo) < h {
            hi = lo;
            lo *= 0.5;
            if lo == 0.0 {
                return Err(Error::DegenerateData("bandwidth bracket collapsed".into()));
            }
        }
    }
    let mut best = (f64::INFINITY, lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let r = s(mid) - h;
        if r.abs() < best.0 {
            best = (r.abs(), mid);
        }
        if r.abs() <= RESIDUAL_TOL || mid == lo || mid == hi {
            break;
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.1)
}

/// Fits one bandwidth per data point by bisection.
pub fn fit_bandwidths(data: Vec<Vec<f64>>, h: f64) -> Result<DensityModel> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two data points".into()));
    }
    if !(h > 1.0 && h < n as f64) {
        return Err(Error::InvalidArgument(format!(
            "h must lie in (1, {n}), got {h}"
        )));
    }
    let dim = data[0].len();
    if let Some(p) = data.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.len(),
        });
    }
    let betas = (0..n)
        .into_par_iter()
        .map(|i| {
            let d: Vec<f64> = data.iter().map(|zj| dist_sq(zj, &data[i])).collect();
            solve_beta(&d, h)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DensityModel { data, h, betas })
}

/// `f(z) = −log ρ(z)`, evaluated through a log-sum-exp so it stays finite
/// far from the data.
#[derive(Debug, Clone)]
pub struct NegLogDensity {
    model: DensityModel,
    log_hn: f64,
}

pub fn neg_log_density(model: DensityModel) -> NegLogDensity {
    let log_hn = (model.h * model.data.len() as f64).ln();
    NegLogDensity { model, log_hn }
}

impl NegLogDensity {
    pub fn model(&self) -> &DensityModel {
        &self.model
    }

    fn exponents(&self, z: &[f64]) -> (Vec<f64>, f64) {
        let e: Vec<f64> = self
            .model
            .data
            .iter()
            .zip(&self.model.betas)
            .map(|(zi, b)| -b * dist_sq(z, zi))
            .collect();
        let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (e, m)
    }
}

impl Objective for NegLogDensity {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn eval(&self, z: &[f64]) -> f64 {
        let (e, m) = self.exponents(z);
        let s: f64 = e.iter().map(|x| (x - m).exp()).sum();
        self.log_hn - (m + s.ln())
    }

    fn gradient(&self, z: &[f64], out: &mut [f64]) -> bool {
        let (e, m) = self.exponents(z);
        let w: Vec<f64> = e.iter().map(|x| (x - m).exp()).collect();
        let total: f64 = w.iter().sum();
        out.fill(0.0);
        for ((wi, zi), b) in w.iter().zip(&self.model.data).zip(&self.model.betas) {
            let c = 2.0 * b * wi / total;
            for ((o, zk), xk) in out.iter_mut().zip(zi).zip(z) {
                *o += c * (xk - zk);
            }
        }
        true
    }

    fn has_gradient(&self) -> bool {
        true
    }

    /// Each kernel is at most 1, so `ρ ≤ 1/h` and `−log ρ ≥ log h`.
    fn lower_bound(&self) -> Option<f64> {
        Some(self.model.h.ln())
    }
}

/// Greedy max-min selection continuing from the given start indices.
/// Returns candidate indices in selection order.
pub fn maxmin_from(candidates: &[Vec<f64>], count: usize, initial: &[usize]) -> Result<Vec<usize>> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate points".into()));
    }
    if count > candidates.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot select {count} of {} candidates",
            candidates.len()
        )));
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    let mut nearest = vec![f64::INFINITY; candidates.len()];
    let take = |i: usize, chosen: &mut Vec<usize>, nearest: &mut Vec<f64>| {
        chosen.push(i);
        for (nd, c) in nearest.iter_mut().zip(candidates) {
            *nd = nd.min(dist_sq(c, &candidates[i]));
        }
    };
    for &i in initial.iter().take(count) {
        take(i, &mut chosen, &mut nearest);
    }
    while chosen.len() < count {
        let (far, _) = nearest
            .iter()
            .enumerate()
            .fold((usize::MAX, f64::NEG_INFINITY), |acc, (i, &d)| {
                if d > acc.1 {
                    (i, d)
                } else {
                    acc
                }
            });
        take(far, &mut chosen, &mut nearest);
    }
    Ok(chosen)
}

/// Max-min landmark selection starting from `seed_count` random candidates.
pub fn select_landmarks_maxmin_indices(
    candidates: &[Vec<f64>],
    count: usize,
    seed_count: usize,
    rng_seed: u64,
) -> Result<Vec<usize>> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let k = seed_count.clamp(1, count.max(1)).min(candidates.len());
    let initial = sample(&mut rng, candidates.len(), k).into_vec();
    maxmin_from(candidates, count, &initial)
}

pub fn select_landmarks_maxmin(
    candidates: &[Vec<f64>],
    count: usize,
    seed_count: usize,
    rng_seed: u64,
) -> Result<LandmarkSet> {
    let idx = select_landmarks_maxmin_indices(candidates, count, seed_count, rng_seed)?;
    LandmarkSet::new(idx.into_iter().map(|i| candidates[i].clone()).collect())
}

/// Largest distance from a sample point to its nearest landmark.
pub fn covering_radius(landmarks: &LandmarkSet, region_sample: &[Vec<f64>]) -> f64 {
    region_sample
        .iter()
        .map(|p| {
            landmarks
                .points()
                .iter()
                .map(|l| dist_sq(p, l))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_closed_form() {
        let m = fit_bandwidths(vec![vec![0.0], vec![1.0], vec![2.0]], 2.0).unwrap();
        assert!((m.betas[1] - std::f64::consts::LN_2).abs() < 1e-9);
        for i in 0..3 {
            assert!(m.residual(i).abs() <= 1e-8);
        }
    }

    #[test]
    fn h_near_n_gives_small_beta() {
        let data: Vec<Vec<f64>> = (0..10).map(|i| vec![0.1 * i as f64, 0.0]).collect();
        let m = fit_bandwidths(data, 10.0 - 1e-3).unwrap();
        assert!(m.betas.iter().all(|&b| b > 0.0 && b < 1e-2));
    }

    #[test]
    fn h_out_of_range() {
        let data = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert!(fit_bandwidths(data.clone(), 1.0).is_err());
        assert!(fit_bandwidths(data, 3.0).is_err());
    }

    #[test]
    fn duplicates_are_degenerate() {
        let data = vec![vec![0.0], vec![0.0], vec![0.0], vec![1.0]];
        assert!(matches!(fit_bandwidths(data, 2.5), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn far_point_has_large_value() {
        let data: Vec<Vec<f64>> = (0..16)
            .map(|i| vec![(i % 4) as f64 / 3.0, (i / 4) as f64 / 3.0])
            .collect();
        let f = neg_log_density(fit_bandwidths(data, 4.0).unwrap());
        assert!(f.eval(&[1e6, 0.0]) > 100.0);
        assert!(f.eval(&[0.5, 0.5]) >= 4f64.ln());
    }

    #[test]
    fn maxmin_by_hand() {
        let c = vec![vec![0.0], vec![1.0], vec![10.0]];
        assert_eq!(maxmin_from(&c, 3, &[0]).unwrap(), vec![0, 2, 1]);
        assert_eq!(select_landmarks_maxmin(&c, 3, 1, 5).unwrap().len(), 3);
        assert!(maxmin_from(&c, 4, &[0]).is_err());
        assert!(maxmin_from(&[], 0, &[]).is_err());
    }

    #[test]
    fn covering_radius_examples() {
        let l = LandmarkSet::new(vec![vec![0.0, 0.0]]).unwrap();
        assert_eq!(covering_radius(&l, &[vec![3.0, 4.0]]), 5.0);
        let pts = vec![vec![0.0, 1.0], vec![2.0, 2.0]];
        let l = LandmarkSet::new(pts.clone()).unwrap();
        assert_eq!(covering_radius(&l, &pts), 0.0);
    }
}
