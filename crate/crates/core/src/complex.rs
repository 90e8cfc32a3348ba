//! The landmark complex: simplices are the landmark subsets all of whose
//! ordered Voronoi cells meet the domain, valued by the largest cellwise
//! infimum of the objective.

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optimizer::{minimize_above, InfimumStatus};
use crate::types::{ConvexDomain, LandmarkSet, Objective, ToleranceConfig};
use crate::voronoi::{cell_nonempty, ordered_cell, orderings_of, Ordering};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexValue {
    pub value: f64,
    /// The value was clamped at the search box of an unbounded cell.
    pub flagged_unbounded: bool,
}

/// Simplices (sorted vertex lists) with filtration values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilteredComplex {
    simplices: BTreeMap<Vec<usize>, SimplexValue>,
    max_dim: usize,
}

impl FilteredComplex {
    pub fn new(max_dim: usize) -> Self {
        FilteredComplex {
            simplices: BTreeMap::new(),
            max_dim,
        }
    }

    /// Builds a complex from explicit values; vertex lists are sorted.
    pub fn from_values(entries: impl IntoIterator<Item = (Vec<usize>, f64)>) -> Self {
        let mut c = FilteredComplex::new(0);
        for (mut s, v) in entries {
            s.sort_unstable();
            c.insert(
                s,
                SimplexValue {
                    value: v,
                    flagged_unbounded: false,
                },
            );
        }
        c
    }

    pub fn insert(&mut self, simplex: Vec<usize>, value: SimplexValue) {
        self.max_dim = self.max_dim.max(simplex.len().saturating_sub(1));
        self.simplices.insert(simplex, value);
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn get(&self, simplex: &[usize]) -> Option<&SimplexValue> {
        self.simplices.get(simplex)
    }

    pub fn value(&self, simplex: &[usize]) -> Option<f64> {
        self.get(simplex).map(|v| v.value)
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        self.simplices.contains_key(simplex)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &SimplexValue)> {
        self.simplices.iter()
    }

    pub fn simplices_of_dim(&self, k: usize) -> impl Iterator<Item = &Vec<usize>> {
        self.simplices.keys().filter(move |s| s.len() == k + 1)
    }

    pub fn count_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim + 1];
        for s in self.simplices.keys() {
            counts[s.len() - 1] += 1;
        }
        counts
    }

    /// `Σ (−1)^{dim Δ}` over all simplices.
    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .keys()
            .map(|s| if s.len() % 2 == 1 { 1 } else { -1 })
            .sum()
    }

    /// Checks face closure and `f(face) ≤ f(coface)`; returns the first
    /// offending (face, coface) pair.
    pub fn check_filtration(&self) -> std::result::Result<(), (Vec<usize>, Vec<usize>)> {
        for (s, v) in &self.simplices {
            if s.len() < 2 {
                continue;
            }
            for facet in facets(s) {
                match self.simplices.get(&facet) {
                    Some(fv) if fv.value <= v.value => {}
                    _ => return Err((facet, s.clone())),
                }
            }
        }
        Ok(())
    }

    /// Raises every value to the maximum over its facets, lowest dimension
    /// first, so that faces never exceed cofaces.
    pub fn monotonize(&mut self) {
        for k in 1..=self.max_dim {
            let keys: Vec<Vec<usize>> = self.simplices_of_dim(k).cloned().collect();
            for s in keys {
                let floor = facets(&s)
                    .filter_map(|f| self.simplices.get(&f).map(|v| v.value))
                    .fold(f64::NEG_INFINITY, f64::max);
                let entry = self.simplices.get_mut(&s).expect("key exists");
                if floor > entry.value {
                    entry.value = floor;
                }
            }
        }
    }

    /// Relabels vertex `i` as `perm_inv[i]`.
    pub fn relabeled(&self, perm_inv: &[usize]) -> Self {
        let mut out = FilteredComplex::new(self.max_dim);
        for (s, v) in &self.simplices {
            let mut t: Vec<usize> = s.iter().map(|&i| perm_inv[i]).collect();
            t.sort_unstable();
            out.insert(t, *v);
        }
        out
    }
}

/// All facets of a sorted simplex with at least two vertices.
pub fn facets(s: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0..s.len()).map(move |skip| {
        s.iter()
            .enumerate()
            .filter(|&(k, _)| k != skip)
            .map(|(_, &x)| x)
            .collect()
    })
}

/// Simplices in filtration order: by value, then dimension, then vertex
/// tuple. Every face precedes its cofaces when values are monotone.
pub fn sorted_filtration(complex: &FilteredComplex) -> Vec<(Vec<usize>, f64)> {
    let mut out: Vec<(Vec<usize>, f64)> = complex
        .iter()
        .map(|(s, v)| (s.clone(), v.value))
        .collect();
    out.sort_by(|(a, va), (b, vb)| {
        va.total_cmp(vb)
            .then(a.len().cmp(&b.len()))
            .then_with(|| a.cmp(b))
    });
    out
}

/// Counters collected while building.
#[derive(Debug, Default)]
pub struct BuildStats {
    pub candidates: AtomicUsize,
    pub feasibility_checks: AtomicUsize,
    pub minimizations: AtomicUsize,
}

impl BuildStats {
    pub fn snapshot(&self) -> (usize, usize, usize) {
        (
            self.candidates.load(AtomicOrdering::Relaxed),
            self.feasibility_checks.load(AtomicOrdering::Relaxed),
            self.minimizations.load(AtomicOrdering::Relaxed),
        )
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream identified by `ids` under `base`.
pub fn derive_seed(base: u64, ids: &[usize]) -> u64 {
    ids.iter()
        .fold(mix(base), |acc, &i| mix(acc ^ (i as u64).wrapping_add(1)))
}

/// Level-`k` candidates: unions of two admitted `(k−1)`-simplices sharing
/// their first `k−1` vertices, kept when every facet was admitted.
fn next_candidates(admitted: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let set: HashSet<&[usize]> = admitted.iter().map(|s| s.as_slice()).collect();
    let mut out = Vec::new();
    let mut start = 0;
    while start < admitted.len() {
        let prefix = &admitted[start][..admitted[start].len() - 1];
        let mut end = start + 1;
        while end < admitted.len() && &admitted[end][..prefix.len()] == prefix {
            end += 1;
        }
        for a in start..end {
            for b in a + 1..end {
                let mut cand = admitted[a].clone();
                cand.push(*admitted[b].last().expect("nonempty"));
                if facets(&cand).all(|f| set.contains(f.as_slice())) {
                    out.push(cand);
                }
            }
        }
        start = end;
    }
    out
}

/// Largest facet value of `simplex` in `complex`, with its flag.
fn facet_floor(complex: &FilteredComplex, simplex: &[usize]) -> Option<SimplexValue> {
    facets(simplex)
        .filter_map(|f| complex.get(&f).copied())
        .fold(None, |acc: Option<SimplexValue>, v| match acc {
            Some(a) if a.value >= v.value => Some(a),
            _ => Some(v),
        })
}

/// Feasibility of every ordering of one candidate, then the filtration
/// value. `None` means rejected.
///
/// The value is the larger of the facet floor and the cellwise infima, so
/// an ordering's search stops once it goes below the running maximum.
fn evaluate_candidate(
    simplex: &[usize],
    floor: Option<SimplexValue>,
    landmarks: &LandmarkSet,
    domain: &ConvexDomain,
    objective: &dyn Objective,
    tol: &ToleranceConfig,
    seed: u64,
    stats: &BuildStats,
) -> Result<Option<SimplexValue>> {
    stats.candidates.fetch_add(1, AtomicOrdering::Relaxed);
    let mut cells = Vec::new();
    for ord in orderings_of(simplex) {
        let ordering = Ordering::new(ord.clone(), landmarks.len())?;
        let cell = ordered_cell(&ordering, landmarks, domain)?;
        stats.feasibility_checks.fetch_add(1, AtomicOrdering::Relaxed);
        let check = cell_nonempty(&cell, tol).map_err(|e| e.in_cell(simplex, &ord))?;
        if !check.nonempty {
            return Ok(None);
        }
        cells.push((ord, cell, check.witness.expect("nonempty cell has a witness")));
    }
    // The landmarks and their centroid start each search near where the
    // cells meet the sampled region.
    let mut hints: Vec<Vec<f64>> = simplex.iter().map(|&i| landmarks.get(i).to_vec()).collect();
    if hints.len() > 1 {
        let k = hints.len() as f64;
        let centroid = (0..landmarks.dim())
            .map(|c| hints.iter().map(|h| h[c]).sum::<f64>() / k)
            .collect();
        hints.push(centroid);
    }
    let mut best = floor;
    for (ord, cell, witness) in cells {
        stats.minimizations.fetch_add(1, AtomicOrdering::Relaxed);
        let stop_at = best.map_or(f64::NEG_INFINITY, |b| b.value);
        let r = minimize_above(
            objective,
            &cell,
            Some(&witness),
            &hints,
            tol,
            derive_seed(seed, &ord),
            stop_at,
        )
        .map_err(|e| e.in_cell(simplex, &ord))?;
        if let Some(r) = r {
            best = Some(SimplexValue {
                value: r.value,
                flagged_unbounded: r.status == InfimumStatus::PossiblyUnbounded,
            });
        }
    }
    Ok(Some(best.expect("vertices have one ordering and no floor")))
}

/// Builds the filtered landmark complex up to `tol.max_dim` (default: the
/// ambient dimension).
pub fn build_complex(
    landmarks: &LandmarkSet,
    domain: &ConvexDomain,
    objective: &dyn Objective,
    tol: &ToleranceConfig,
    seed: u64,
) -> Result<FilteredComplex> {
    build_complex_with_stats(landmarks, domain, objective, tol, seed, &BuildStats::default())
}

pub fn build_complex_with_stats(
    landmarks: &LandmarkSet,
    domain: &ConvexDomain,
    objective: &dyn Objective,
    tol: &ToleranceConfig,
    seed: u64,
    stats: &BuildStats,
) -> Result<FilteredComplex> {
    tol.check()?;
    let d = landmarks.dim();
    for found in [domain.dim(), objective.dim()] {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    let max_dim = tol.max_dim_for(d);
    let mut complex = FilteredComplex::new(0);
    let mut candidates: Vec<Vec<usize>> = (0..landmarks.len()).map(|i| vec![i]).collect();
    for k in 0..=max_dim {
        if candidates.is_empty() {
            break;
        }
        let results: Vec<Result<Option<SimplexValue>>> = candidates
            .par_iter()
            .map(|s| {
                let floor = facet_floor(&complex, s);
                evaluate_candidate(s, floor, landmarks, domain, objective, tol, seed, stats)
            })
            .collect();
        let mut admitted = Vec::new();
        for (s, r) in candidates.into_iter().zip(results) {
            if let Some(v) = r? {
                complex.insert(s.clone(), v);
                admitted.push(s);
            }
        }
        if k == max_dim {
            break;
        }
        candidates = next_candidates(&admitted);
    }
    complex.max_dim = max_dim;
    complex.monotonize();
    Ok(complex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::FnObjective;

    fn lm(pts: &[&[f64]]) -> LandmarkSet {
        LandmarkSet::new(pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn single_edge() {
        let l = lm(&[&[0.0, 0.0], &[2.0, 0.0]]);
        let c = build_complex(
            &l,
            &ConvexDomain::whole_space(2),
            &FnObjective::zero(2),
            &ToleranceConfig::default(),
            0,
        )
        .unwrap();
        assert_eq!(c.len(), 3);
        for s in [vec![0], vec![1], vec![0, 1]] {
            assert_eq!(c.value(&s), Some(0.0));
        }
    }

    #[test]
    fn collinear_skips_long_edge() {
        let l = lm(&[&[0.0], &[1.0], &[10.0]]);
        let c = build_complex(
            &l,
            &ConvexDomain::whole_space(1),
            &FnObjective::zero(1),
            &ToleranceConfig::default(),
            0,
        )
        .unwrap();
        assert!(c.contains(&[0, 1]) && c.contains(&[1, 2]));
        assert!(!c.contains(&[0, 2]));
        assert_eq!(c.len(), 5);
    }

    #[test]
    fn orderings_checked_per_candidate() {
        let l = lm(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let stats = BuildStats::default();
        let c = build_complex_with_stats(
            &l,
            &ConvexDomain::whole_space(2),
            &FnObjective::zero(2),
            &ToleranceConfig::default(),
            0,
            &stats,
        )
        .unwrap();
        assert_eq!(c.len(), 7);
        // 3 vertices (1 ordering each), 3 edges (2 each), 1 triangle (6).
        assert_eq!(stats.snapshot(), (7, 15, 15));
    }

    #[test]
    fn sorted_filtration_tiebreaks() {
        let c = FilteredComplex::from_values([
            (vec![0, 1], 1.0),
            (vec![1], 0.0),
            (vec![0], 0.0),
        ]);
        let order: Vec<Vec<usize>> = sorted_filtration(&c).into_iter().map(|(s, _)| s).collect();
        assert_eq!(order, vec![vec![0], vec![1], vec![0, 1]]);

        let c = FilteredComplex::from_values([(vec![0, 1], 1.0), (vec![1], 1.0), (vec![0], 0.0)]);
        let order: Vec<Vec<usize>> = sorted_filtration(&c).into_iter().map(|(s, _)| s).collect();
        assert_eq!(order, vec![vec![0], vec![1], vec![0, 1]]);
    }

    #[test]
    fn monotonize_lifts_cofaces() {
        let mut c = FilteredComplex::from_values([
            (vec![0], 0.0),
            (vec![1], 2.0),
            (vec![0, 1], 1.0),
        ]);
        assert!(c.check_filtration().is_err());
        c.monotonize();
        assert_eq!(c.value(&[0, 1]), Some(2.0));
        assert!(c.check_filtration().is_ok());
    }

    #[test]
    fn candidate_generation() {
        let admitted = vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![1, 3]];
        assert_eq!(next_candidates(&admitted), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn seeds_differ_by_stream() {
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
        assert_eq!(derive_seed(7, &[3]), derive_seed(7, &[3]));
    }
}
