//! Ordered and unordered higher-order Voronoi cells as H-polytopes.
//!
//! Every distance comparison `d(p, λ_a) ≤ d(p, λ_b)` is squared and expanded
//! into the half-space `2(λ_b − λ_a)·p ≤ ‖λ_b‖² − ‖λ_a‖²`, so each cell is
//! an exact linear system.

use crate::error::{Error, Result};
use crate::lp::{max_slack_point, ConstraintSystem, LinearConstraint, LpStatus};
use crate::types::{dist_sq, dot, ConvexDomain, LandmarkSet, ToleranceConfig};

/// A sequence `(i_1, …, i_m)` of distinct landmark indices (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ordering(Vec<usize>);

impl Ordering {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidOrdering {
                indices,
                reason: "empty".into(),
            });
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidOrdering {
                reason: format!("index {bad} out of range for {n} landmarks"),
                indices,
            });
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidOrdering {
                indices,
                reason: "repeated index".into(),
            });
        }
        Ok(Ordering(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> usize {
        *self.0.last().expect("orderings are nonempty")
    }
}

/// All orderings of a sorted simplex, in lexicographic order.
pub fn orderings_of(simplex: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = simplex.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    out
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Half-space `d(p, λ_a) ≤ d(p, λ_b)`.
pub fn bisector(landmarks: &LandmarkSet, a: usize, b: usize) -> LinearConstraint {
    let la = landmarks.get(a);
    let lb = landmarks.get(b);
    let coeffs = la.iter().zip(lb).map(|(x, y)| 2.0 * (y - x)).collect();
    LinearConstraint::new(coeffs, dot(lb, lb) - dot(la, la))
}

fn check_domain(landmarks: &LandmarkSet, domain: &ConvexDomain) -> Result<()> {
    if landmarks.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: landmarks.dim(),
            found: domain.dim(),
        });
    }
    Ok(())
}

/// Indices outside `members`, nearest to `anchor` first.
fn outsiders_by_distance(landmarks: &LandmarkSet, members: &[usize], anchor: usize) -> Vec<usize> {
    let mut inside = vec![false; landmarks.len()];
    for &i in members {
        inside[i] = true;
    }
    let a = landmarks.get(anchor);
    let mut rest: Vec<(f64, usize)> = (0..landmarks.len())
        .filter(|&j| !inside[j])
        .map(|j| (dist_sq(a, landmarks.get(j)), j))
        .collect();
    rest.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    rest.into_iter().map(|(_, j)| j).collect()
}

/// `Vor_{(i_1,…,i_m)}(λ) ∩ X`.
///
/// Rows are the chain `d(p,λ_{i_k}) ≤ d(p,λ_{i_{k+1}})`, then the domain
/// inequalities, then the exclusions `d(p,λ_{i_m}) ≤ d(p,λ_j)` for every
/// `j` outside the ordering, nearest `λ_j` first. The chain carries the
/// exclusions over to the earlier elements.
pub fn ordered_cell(
    ordering: &Ordering,
    landmarks: &LandmarkSet,
    domain: &ConvexDomain,
) -> Result<ConstraintSystem> {
    check_domain(landmarks, domain)?;
    let idx = ordering.indices();
    if let Some(&bad) = idx.iter().find(|&&i| i >= landmarks.len()) {
        return Err(Error::InvalidOrdering {
            indices: idx.to_vec(),
            reason: format!("index {bad} out of range for {} landmarks", landmarks.len()),
        });
    }
    let mut rows: Vec<LinearConstraint> = idx
        .windows(2)
        .map(|w| bisector(landmarks, w[0], w[1]))
        .collect();
    rows.extend(domain.inequality_rows());
    let last = ordering.last();
    rows.extend(
        outsiders_by_distance(landmarks, idx, last)
            .into_iter()
            .map(|j| bisector(landmarks, last, j)),
    );
    Ok(ConstraintSystem::new(
        landmarks.dim(),
        rows,
        domain.equality_rows(),
    ))
}

/// `Vor_{{i_1,…,i_m}}(λ) ∩ X`: every member is at least as close as every
/// non-member.
pub fn unordered_cell(
    members: &[usize],
    landmarks: &LandmarkSet,
    domain: &ConvexDomain,
) -> Result<ConstraintSystem> {
    check_domain(landmarks, domain)?;
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    Ordering::new(sorted.clone(), landmarks.len())?;
    let mut rows = domain.inequality_rows();
    let outside = outsiders_by_distance(landmarks, &sorted, sorted[0]);
    for &i in &sorted {
        rows.extend(outside.iter().map(|&j| bisector(landmarks, i, j)));
    }
    Ok(ConstraintSystem::new(
        landmarks.dim(),
        rows,
        domain.equality_rows(),
    ))
}

/// Outcome of a nonemptiness test.
#[derive(Debug, Clone, PartialEq)]
pub struct CellCheck {
    pub nonempty: bool,
    /// A point inside the cell up to `tol_feas` (present iff nonempty).
    pub witness: Option<Vec<f64>>,
    /// Optimal normalized slack; `-∞` if the equalities are inconsistent.
    pub slack: f64,
}

/// Nonempty iff the maximal normalized slack is at least `-tol_feas`.
pub fn cell_nonempty(system: &ConstraintSystem, tol: &ToleranceConfig) -> Result<CellCheck> {
    let res = max_slack_point(system)?;
    Ok(match res.status {
        LpStatus::Optimal => {
            let slack = res.value.expect("optimal LP has a value");
            let nonempty = slack >= -tol.tol_feas;
            CellCheck {
                nonempty,
                witness: if nonempty { res.point } else { None },
                slack,
            }
        }
        _ => CellCheck {
            nonempty: false,
            witness: None,
            slack: f64::NEG_INFINITY,
        },
    })
}

/// Whether `simplex` belongs to the Delaunay complex: some `p` and `c ≥ 0`
/// have `d(p,λ_i) = c` for members and `c ≤ d(p,λ_j)` for all landmarks.
///
/// Solved as an LP over `(p, t)` with `t = c² − ‖p‖²`: members give
/// `2λ_i·p + t = ‖λ_i‖²`, non-members `2λ_j·p + t ≤ ‖λ_j‖²`.
pub fn delaunay_membership(
    simplex: &[usize],
    landmarks: &LandmarkSet,
    tol: &ToleranceConfig,
) -> Result<bool> {
    let mut sorted = simplex.to_vec();
    sorted.sort_unstable();
    Ordering::new(sorted.clone(), landmarks.len())?;
    let d = landmarks.dim();
    let lift = |i: usize| {
        let l = landmarks.get(i);
        let mut row: Vec<f64> = l.iter().map(|x| 2.0 * x).collect();
        row.push(1.0);
        LinearConstraint::new(row, dot(l, l))
    };
    let equalities = sorted.iter().map(|&i| lift(i)).collect();
    let inequalities = outsiders_by_distance(landmarks, &sorted, sorted[0])
        .into_iter()
        .map(lift)
        .collect();
    let system = ConstraintSystem::new(d + 1, inequalities, equalities);
    Ok(cell_nonempty(&system, tol)?.nonempty)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lm(pts: &[&[f64]]) -> LandmarkSet {
        LandmarkSet::new(pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    fn normalized(row: &LinearConstraint) -> (Vec<f64>, f64) {
        let n = crate::types::norm(&row.coeffs);
        (row.coeffs.iter().map(|c| c / n).collect(), row.rhs / n)
    }

    #[test]
    fn two_point_bisector() {
        let l = lm(&[&[0.0, 0.0], &[2.0, 0.0]]);
        let dom = ConvexDomain::whole_space(2);
        let s = ordered_cell(&Ordering::new(vec![0, 1], 2).unwrap(), &l, &dom).unwrap();
        assert_eq!(s.inequalities().len(), 1);
        let (a, b) = normalized(&s.inequalities()[0]);
        assert!((a[0] - 1.0).abs() < 1e-15 && a[1].abs() < 1e-15 && (b - 1.0).abs() < 1e-15);

        let s = ordered_cell(&Ordering::new(vec![1, 0], 2).unwrap(), &l, &dom).unwrap();
        let (a, b) = normalized(&s.inequalities()[0]);
        assert!((a[0] + 1.0).abs() < 1e-15 && (b + 1.0).abs() < 1e-15);
    }

    #[test]
    fn collinear_unordered_pair_is_empty() {
        let l = lm(&[&[0.0], &[1.0], &[10.0]]);
        let dom = ConvexDomain::whole_space(1);
        let s = unordered_cell(&[0, 2], &l, &dom).unwrap();
        let bounds: Vec<(Vec<f64>, f64)> = s.inequalities().iter().map(normalized).collect();
        assert!(bounds.iter().any(|(a, b)| a[0] > 0.0 && (b - 0.5).abs() < 1e-12));
        assert!(bounds.iter().any(|(a, b)| a[0] < 0.0 && (b + 5.5).abs() < 1e-12));
        let tol = ToleranceConfig::default();
        assert!(!cell_nonempty(&s, &tol).unwrap().nonempty);
        for ord in orderings_of(&[0, 2]) {
            let s = ordered_cell(&Ordering::new(ord, 3).unwrap(), &l, &dom).unwrap();
            assert!(!cell_nonempty(&s, &tol).unwrap().nonempty);
        }
    }

    #[test]
    fn half_plane_witness() {
        let l = lm(&[&[0.0, 0.0], &[2.0, 0.0]]);
        let s = ordered_cell(
            &Ordering::new(vec![0, 1], 2).unwrap(),
            &l,
            &ConvexDomain::whole_space(2),
        )
        .unwrap();
        let tol = ToleranceConfig::default();
        let c = cell_nonempty(&s, &tol).unwrap();
        assert!(c.nonempty);
        assert!(c.witness.unwrap()[0] <= 1.0 + tol.tol_feas);
    }

    #[test]
    fn cocircular_square_center_cell() {
        let l = lm(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        let s = ordered_cell(
            &Ordering::new(vec![0, 1, 2, 3], 4).unwrap(),
            &l,
            &ConvexDomain::whole_space(2),
        )
        .unwrap();
        let c = cell_nonempty(&s, &ToleranceConfig::default()).unwrap();
        assert!(c.nonempty);
        assert!(c.slack.abs() < 1e-9);
        let w = c.witness.unwrap();
        assert!((w[0] - 0.5).abs() < 1e-6 && (w[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn delaunay_examples() {
        let tol = ToleranceConfig::default();
        let l = lm(&[&[0.0], &[1.0], &[10.0]]);
        for i in 0..3 {
            assert!(delaunay_membership(&[i], &l, &tol).unwrap());
        }
        assert!(delaunay_membership(&[0, 1], &l, &tol).unwrap());
        assert!(delaunay_membership(&[1, 2], &l, &tol).unwrap());
        assert!(!delaunay_membership(&[0, 2], &l, &tol).unwrap());
    }

    #[test]
    fn orderings_are_lexicographic() {
        let o = orderings_of(&[2, 0, 5]);
        assert_eq!(
            o,
            vec![
                vec![0, 2, 5],
                vec![0, 5, 2],
                vec![2, 0, 5],
                vec![2, 5, 0],
                vec![5, 0, 2],
                vec![5, 2, 0]
            ]
        );
        assert_eq!(orderings_of(&[0, 1, 2, 3]).len(), 24);
    }

    #[test]
    fn invalid_orderings() {
        assert!(Ordering::new(vec![], 3).is_err());
        assert!(Ordering::new(vec![0, 0], 3).is_err());
        assert!(Ordering::new(vec![3], 3).is_err());
    }

    #[test]
    fn domain_dimension_must_match() {
        let l = lm(&[&[0.0, 0.0], &[2.0, 0.0]]);
        let r = ordered_cell(
            &Ordering::new(vec![0], 2).unwrap(),
            &l,
            &ConvexDomain::whole_space(3),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
