//! Built-in objectives, domains and datasets.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::density::{fit_bandwidths, neg_log_density};
use crate::error::{Error, Result};
use crate::types::{dist_sq, ConvexDomain, FnObjective, LandmarkSet, Objective};

/// Continuous Ising energy `H(σ) = −Σ σ_i σ_{i+1}` on `[−1, 1]^d`, with the
/// closing bond `σ_d σ_1` when `circular`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ising {
    pub sites: usize,
    pub circular: bool,
}

impl Ising {
    fn bonds(&self) -> impl Iterator<Item = (usize, usize)> {
        let d = self.sites;
        let closing = if self.circular && d > 2 { Some((d - 1, 0)) } else { None };
        (0..d - 1).map(|i| (i, i + 1)).chain(closing)
    }

    fn bond_count(&self) -> usize {
        self.bonds().count()
    }
}

impl Objective for Ising {
    fn dim(&self) -> usize {
        self.sites
    }

    fn eval(&self, s: &[f64]) -> f64 {
        -self.bonds().map(|(i, j)| s[i] * s[j]).sum::<f64>()
    }

    fn gradient(&self, s: &[f64], out: &mut [f64]) -> bool {
        out.fill(0.0);
        for (i, j) in self.bonds() {
            out[i] -= s[j];
            out[j] -= s[i];
        }
        true
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn lower_bound(&self) -> Option<f64> {
        Some(-(self.bond_count() as f64))
    }
}

/// The Ising energy and its box domain. With two sites the chain and the
/// circle coincide (the closing bond would repeat the only bond).
pub fn ising_objective(sites: usize, circular: bool) -> Result<(Ising, ConvexDomain)> {
    if sites < 2 {
        return Err(Error::InvalidArgument(format!(
            "Ising model needs at least 2 sites, got {sites}"
        )));
    }
    Ok((Ising { sites, circular }, ConvexDomain::cube(sites, -1.0, 1.0)))
}

/// The `count` lowest-energy `±1` states, ties broken lexicographically with
/// `−1 < 1`.
pub fn ising_landmarks(sites: usize, count: usize, circular: bool) -> Result<LandmarkSet> {
    let (model, _) = ising_objective(sites, circular)?;
    if sites >= usize::BITS as usize - 1 || count > 1usize << sites {
        return Err(Error::InvalidArgument(format!(
            "cannot choose {count} distinct states of {sites} spins"
        )));
    }
    let mut states: Vec<(f64, Vec<f64>)> = (0..1usize << sites)
        .map(|bits| {
            // Most significant bit first, so that integer order is the
            // lexicographic order of the spin vectors.
            let s: Vec<f64> = (0..sites)
                .map(|k| if bits >> (sites - 1 - k) & 1 == 1 { 1.0 } else { -1.0 })
                .collect();
            (model.eval(&s), s)
        })
        .collect();
    states.sort_by(|a, b| a.0.total_cmp(&b.0));
    LandmarkSet::new(states.into_iter().take(count).map(|(_, s)| s).collect())
}

/// `max_i (min_{j≠i} ‖p_i − p_j‖² − 1)²` for three planar points packed as
/// `(x1, y1, x2, y2, x3, y3)`: zero exactly when every point's nearest
/// neighbour is at unit distance, and at least 1 whenever two points
/// collide.
#[derive(Debug, Clone, Copy, Default)]
pub struct ThreePointConfig;

impl Objective for ThreePointConfig {
    fn dim(&self) -> usize {
        6
    }

    fn eval(&self, p: &[f64]) -> f64 {
        let pt = |i: usize| &p[2 * i..2 * i + 2];
        let (d01, d02, d12) = (dist_sq(pt(0), pt(1)), dist_sq(pt(0), pt(2)), dist_sq(pt(1), pt(2)));
        let term = |nearest: f64| (nearest - 1.0) * (nearest - 1.0);
        term(d01.min(d02)).max(term(d01.min(d12))).max(term(d02.min(d12)))
    }

    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// The three-point configuration objective on `R^6` with the centroid pinned
/// to the origin.
pub fn config3_objective() -> (ThreePointConfig, ConvexDomain) {
    let ex = vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
    let ey = vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
    let domain = ConvexDomain::new(6, vec![], vec![(ex, 0.0), (ey, 0.0)], None)
        .expect("centering constraints are well formed");
    (ThreePointConfig, domain)
}

/// Centred configurations with `f ≤ threshold`, drawn by rejection from the
/// box `[−half_width, half_width]^6`.
pub fn config3_pool(
    pool_size: usize,
    threshold: f64,
    half_width: f64,
    rng_seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let f = ThreePointConfig;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut pool = Vec::with_capacity(pool_size);
    let max_draws = 10_000 * pool_size.max(1);
    let mut draws = 0;
    while pool.len() < pool_size {
        if draws == max_draws {
            return Err(Error::InvalidArgument(format!(
                "rejection sampling found only {} of {pool_size} points",
                pool.len()
            )));
        }
        draws += 1;
        let mut p: Vec<f64> = (0..6)
            .map(|_| rng.random_range(-half_width..=half_width))
            .collect();
        let (mx, my) = ((p[0] + p[2] + p[4]) / 3.0, (p[1] + p[3] + p[5]) / 3.0);
        for k in 0..3 {
            p[2 * k] -= mx;
            p[2 * k + 1] -= my;
        }
        if f.eval(&p) <= threshold {
            pool.push(p);
        }
    }
    Ok(pool)
}

/// `f(x, y) = −y(8y − x)` on the plane, with its four landmarks.
pub fn figure1_model() -> (FnObjective, ConvexDomain, LandmarkSet) {
    let f = FnObjective::new(2, |p| -p[1] * (8.0 * p[1] - p[0])).with_gradient(|p, g| {
        g[0] = p[1];
        g[1] = p[0] - 16.0 * p[1];
    });
    let landmarks = LandmarkSet::new(vec![
        vec![0.0, 8.0],
        vec![-8.0, 0.0],
        vec![8.0, 0.0],
        vec![0.0, -16.0],
    ])
    .expect("fixed landmarks are valid");
    (f, ConvexDomain::whole_space(2), landmarks)
}

/// `f(x, y) = (x² + y² − 1)²`, whose sublevel sets for `0 < a < 1` are
/// annuli around the unit circle.
pub fn annulus_objective() -> FnObjective {
    FnObjective::new(2, |p| {
        let r = p[0] * p[0] + p[1] * p[1] - 1.0;
        r * r
    })
    .with_gradient(|p, g| {
        let c = 4.0 * (p[0] * p[0] + p[1] * p[1] - 1.0);
        g[0] = c * p[0];
        g[1] = c * p[1];
    })
    .with_lower_bound(0.0)
}

/// Points on the lemniscate-like curve `(cos t, sin 2t)` at evenly spaced
/// `t ∈ [0, 2π)`, perturbed by isotropic Gaussian noise of the given scale.
pub fn infinity_dataset(n: usize, noise: f64, rng_seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            let ex: f64 = rng.sample(StandardNormal);
            let ey: f64 = rng.sample(StandardNormal);
            vec![t.cos() + noise * ex, (2.0 * t).sin() + noise * ey]
        })
        .collect()
}

/// A named built-in model with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    IsingInterval { sites: usize },
    IsingCircle { sites: usize },
    Config3,
    Figure1,
    Annulus,
    Density { h: f64 },
}

/// An instantiated model: objective, domain and the model's own landmarks
/// when it has fixed ones.
#[derive(Clone)]
pub struct Model {
    pub objective: Arc<dyn Objective>,
    pub domain: ConvexDomain,
    pub landmarks: Option<LandmarkSet>,
}

impl ModelSpec {
    pub const NAMES: [&'static str; 6] = [
        "ising_interval",
        "ising_circle",
        "config3",
        "figure1",
        "annulus",
        "density",
    ];

    /// Parses a model name; `sites` and `h` default to 9 and 50.
    pub fn from_name(name: &str, sites: Option<usize>, h: Option<f64>) -> Result<Self> {
        let sites = sites.unwrap_or(9);
        let spec = match name {
            "ising_interval" => ModelSpec::IsingInterval { sites },
            "ising_circle" => ModelSpec::IsingCircle { sites },
            "config3" => ModelSpec::Config3,
            "figure1" => ModelSpec::Figure1,
            "annulus" => ModelSpec::Annulus,
            "density" => ModelSpec::Density {
                h: h.unwrap_or(50.0),
            },
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown model `{other}`; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::IsingInterval { .. } => "ising_interval",
            ModelSpec::IsingCircle { .. } => "ising_circle",
            ModelSpec::Config3 => "config3",
            ModelSpec::Figure1 => "figure1",
            ModelSpec::Annulus => "annulus",
            ModelSpec::Density { .. } => "density",
        }
    }

    pub fn check(&self) -> Result<()> {
        match *self {
            ModelSpec::IsingInterval { sites } | ModelSpec::IsingCircle { sites } if sites < 2 => {
                Err(Error::InvalidArgument(format!(
                    "Ising model needs at least 2 sites, got {sites}"
                )))
            }
            ModelSpec::Density { h } if !(h > 1.0) => Err(Error::InvalidArgument(format!(
                "density model needs h > 1, got {h}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn needs_data(&self) -> bool {
        matches!(self, ModelSpec::Density { .. })
    }

    /// Builds the model. The density model is fitted to `data`; the others
    /// ignore it.
    pub fn instantiate(&self, data: Option<&[Vec<f64>]>) -> Result<Model> {
        self.check()?;
        Ok(match *self {
            ModelSpec::IsingInterval { sites } | ModelSpec::IsingCircle { sites } => {
                let circular = matches!(self, ModelSpec::IsingCircle { .. });
                let (f, domain) = ising_objective(sites, circular)?;
                Model {
                    objective: Arc::new(f),
                    domain,
                    landmarks: None,
                }
            }
            ModelSpec::Config3 => {
                let (f, domain) = config3_objective();
                Model {
                    objective: Arc::new(f),
                    domain,
                    landmarks: None,
                }
            }
            ModelSpec::Figure1 => {
                let (f, domain, landmarks) = figure1_model();
                Model {
                    objective: Arc::new(f),
                    domain,
                    landmarks: Some(landmarks),
                }
            }
            ModelSpec::Annulus => Model {
                objective: Arc::new(annulus_objective()),
                domain: ConvexDomain::whole_space(2),
                landmarks: None,
            },
            ModelSpec::Density { h } => {
                let data = data.ok_or_else(|| {
                    Error::InvalidArgument("density model needs a data set".into())
                })?;
                let model = fit_bandwidths(data.to_vec(), h)?;
                let dim = model.dim();
                Model {
                    objective: Arc::new(neg_log_density(model)),
                    domain: ConvexDomain::whole_space(dim),
                    landmarks: None,
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ising_values() {
        let (f, dom) = ising_objective(9, false).unwrap();
        assert_eq!(f.eval(&[1.0; 9]), -8.0);
        assert_eq!(f.eval(&[0.0; 9]), 0.0);
        assert_eq!(f.lower_bound(), Some(-8.0));
        assert_eq!(dom.bounds().unwrap()[0], (-1.0, 1.0));
        let (c, _) = ising_objective(9, true).unwrap();
        assert_eq!(c.eval(&[1.0; 9]), -9.0);
        assert_eq!(c.lower_bound(), Some(-9.0));
        assert!(ising_objective(1, false).is_err());
    }

    #[test]
    fn ising_lowest_states() {
        let l = ising_landmarks(3, 2, false).unwrap();
        assert_eq!(l.get(0), &[-1.0, -1.0, -1.0]);
        assert_eq!(l.get(1), &[1.0, 1.0, 1.0]);
        let l = ising_landmarks(3, 4, false).unwrap();
        assert_eq!(l.get(2), &[-1.0, -1.0, 1.0]);
        assert_eq!(l.get(3), &[-1.0, 1.0, 1.0]);
        assert!(ising_landmarks(3, 9, false).is_err());

        let (f, _) = ising_objective(9, true).unwrap();
        let l = ising_landmarks(9, 20, true).unwrap();
        let e: Vec<f64> = l.points().iter().map(|p| f.eval(p)).collect();
        assert!(e.windows(2).all(|w| w[0] <= w[1]));
        for i in 0..20 {
            for j in i + 1..20 {
                assert_ne!(l.get(i), l.get(j));
            }
        }
    }

    #[test]
    fn config3_values() {
        let (f, dom) = config3_objective();
        let h = 3f64.sqrt() / 2.0;
        let tri = [0.0, 2.0 * h / 3.0, -0.5, -h / 3.0, 0.5, -h / 3.0];
        assert!(f.eval(&tri).abs() < 1e-15);
        assert!(dom.contains(&tri, 1e-12));
        assert_eq!(f.eval(&[-1.0, 0.0, 0.0, 0.0, 1.0, 0.0]), 0.0);
        assert!(f.eval(&[1.0, 0.0, 1.0, 0.0, -2.0, 0.0]) >= 1.0);
        assert_eq!(f.eval(&[0.0; 6]), 1.0);
        assert!(f.eval(&[0.3, 0.1, 0.3, 0.1, -0.6, -0.2]) >= 1.0);
        // Nearest neighbour at distance 0.5, the other at distance 1.
        assert_eq!(f.eval(&[0.0, 0.0, 0.5, 0.0, 1.0, 0.0]), 0.5625);
        assert_eq!(f.lower_bound(), Some(0.0));
    }

    #[test]
    fn config3_pool_is_centred_and_low() {
        let pool = config3_pool(50, 0.1, 1.5, 3).unwrap();
        let f = ThreePointConfig;
        for p in &pool {
            assert!(f.eval(p) <= 0.1);
            assert!((p[0] + p[2] + p[4]).abs() < 1e-12);
        }
    }

    #[test]
    fn figure1_values() {
        let (f, _, l) = figure1_model();
        assert_eq!(f.eval(l.get(0)), -8.0 * 64.0);
        assert_eq!(f.eval(l.get(3)), -16.0 * 128.0);
        assert_eq!(f.eval(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn specs_parse() {
        assert_eq!(
            ModelSpec::from_name("ising_circle", Some(4), None).unwrap(),
            ModelSpec::IsingCircle { sites: 4 }
        );
        assert!(ModelSpec::from_name("ising_interval", Some(1), None).is_err());
        assert!(ModelSpec::from_name("nope", None, None).is_err());
        assert!(ModelSpec::Density { h: 5.0 }.instantiate(None).is_err());
        let m = ModelSpec::Figure1.instantiate(None).unwrap();
        assert_eq!(m.landmarks.unwrap().len(), 4);
    }
}
