//! Sublevel-set persistent homology of a function on a convex domain,
//! computed from a landmark complex whose simplices are ordered
//! higher-order Voronoi cells and whose filtration values are minima of the
//! function over those cells.

pub mod complex;
pub mod density;
pub mod error;
pub mod lp;
pub mod models;
pub mod optimizer;
pub mod persistence;
pub mod projection;
pub mod types;
pub mod validate;
pub mod voronoi;

pub use complex::{build_complex, sorted_filtration, FilteredComplex};
pub use error::{Error, Result};
pub use persistence::{persistent_betti, reduce, PersistenceDiagram};
pub use types::{ConvexDomain, FnObjective, LandmarkSet, Objective, Point, ToleranceConfig};
pub use validate::{validate, ValidationReport};
