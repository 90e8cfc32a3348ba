//! Z/2 persistent homology of a filtered simplicial complex.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// One interval `[birth, death)` in homological dimension `dim`;
/// `death = +∞` for classes that never die.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl DiagramPoint {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    pub points: Vec<DiagramPoint>,
    /// Pairs with `birth == death`, kept apart from the diagram proper.
    pub zero_persistence: Vec<DiagramPoint>,
}

impl PersistenceDiagram {
    pub fn new(mut points: Vec<DiagramPoint>) -> Self {
        sort_points(&mut points);
        PersistenceDiagram {
            points,
            zero_persistence: Vec::new(),
        }
    }

    pub fn points_in_dim(&self, k: usize) -> impl Iterator<Item = &DiagramPoint> {
        self.points.iter().filter(move |p| p.dim == k)
    }

    /// Betti number of the whole complex in dimension `k`.
    pub fn betti(&self, k: usize) -> usize {
        self.points_in_dim(k).filter(|p| p.is_essential()).count()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.points.iter().map(|p| p.dim).max()
    }

    /// Persistence values in dimension `k`, largest first.
    pub fn persistences(&self, k: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.points_in_dim(k).map(|p| p.persistence()).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }
}

fn sort_points(points: &mut [DiagramPoint]) {
    points.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.total_cmp(&b.death))
    });
}

/// `β_k^{a,b}`: classes born by `a` and still alive after `b`.
pub fn persistent_betti(diagram: &PersistenceDiagram, k: usize, a: f64, b: f64) -> Result<usize> {
    if a > b || a.is_nan() || b.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "persistent Betti number needs a ≤ b, got a = {a}, b = {b}"
        )));
    }
    Ok(diagram
        .points_in_dim(k)
        .filter(|p| p.birth <= a && p.death > b)
        .count())
}

/// Symmetric difference of two sorted index lists.
fn add_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Column reduction with clearing over a face-respecting filtration order.
///
/// Each entry is a sorted vertex list and its filtration value. Every facet
/// of an entry must appear earlier in the list.
pub fn reduce(sorted: &[(Vec<usize>, f64)]) -> Result<PersistenceDiagram> {
    let n = sorted.len();
    let mut position: HashMap<&[usize], usize> = HashMap::with_capacity(n);
    for (i, (s, _)) in sorted.iter().enumerate() {
        position.insert(s.as_slice(), i);
    }
    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut max_dim = 0;
    for (j, (s, v)) in sorted.iter().enumerate() {
        max_dim = max_dim.max(s.len().saturating_sub(1));
        let mut col = Vec::with_capacity(s.len());
        if s.len() > 1 {
            for skip in 0..s.len() {
                let facet: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &x)| x)
                    .collect();
                match position.get(facet.as_slice()) {
                    Some(&i) if i < j && sorted[i].1 <= *v => col.push(i),
                    _ => {
                        return Err(Error::OrderViolation {
                            face: facet,
                            coface: s.clone(),
                        })
                    }
                }
            }
        }
        col.sort_unstable();
        columns.push(col);
    }

    let dim_of = |i: usize| sorted[i].0.len() - 1;
    let mut column_with_low: Vec<Option<usize>> = vec![None; n];
    let mut cleared = vec![false; n];
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); max_dim + 1];
    for i in 0..n {
        by_dim[dim_of(i)].push(i);
    }
    for dim in (1..=max_dim).rev() {
        for &j in &by_dim[dim] {
            if cleared[j] {
                columns[j].clear();
                continue;
            }
            let mut col = std::mem::take(&mut columns[j]);
            while let Some(&low) = col.last() {
                match column_with_low[low] {
                    Some(k) => col = add_columns(&col, &columns[k]),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                column_with_low[low] = Some(j);
                cleared[low] = true;
            }
            columns[j] = col;
        }
    }

    let mut points = Vec::new();
    let mut zero = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        if let Some(&low) = col.last() {
            let p = DiagramPoint {
                dim: dim_of(low),
                birth: sorted[low].1,
                death: sorted[j].1,
            };
            if p.birth == p.death {
                zero.push(p);
            } else {
                points.push(p);
            }
        }
    }
    for i in 0..n {
        if column_with_low[i].is_none() && columns[i].is_empty() {
            points.push(DiagramPoint {
                dim: dim_of(i),
                birth: sorted[i].1,
                death: f64::INFINITY,
            });
        }
    }
    sort_points(&mut points);
    sort_points(&mut zero);
    Ok(PersistenceDiagram {
        points,
        zero_persistence: zero,
    })
}
