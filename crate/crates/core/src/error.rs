use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate in point {index}")]
    NonFinite { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid ordering {indices:?}: {reason}")]
    InvalidOrdering { indices: Vec<usize>, reason: String },

    #[error("simplex solver stalled after {pivots} pivots")]
    SolverStalled { pivots: usize },

    #[error("projection onto polytope failed: {0}")]
    ProjectionFailed(String),

    #[error("objective evaluation failed at {point:?}")]
    ObjectiveEvaluation { point: Vec<f64> },

    #[error("could not produce a feasible start point")]
    StartGenerationFailed,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("filtration order violated: simplex {coface:?} precedes its face {face:?}")]
    OrderViolation { face: Vec<usize>, coface: Vec<usize> },

    #[error("while processing simplex {simplex:?} ordering {ordering:?}: {source}")]
    Cell {
        simplex: Vec<usize>,
        ordering: Vec<usize>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn in_cell(self, simplex: &[usize], ordering: &[usize]) -> Self {
        Error::Cell {
            simplex: simplex.to_vec(),
            ordering: ordering.to_vec(),
            source: Box::new(self),
        }
    }
}
