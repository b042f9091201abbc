use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Numerical and precondition failures raised by the library modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point has squared norm {norm_sq} which is not inside the ball (margin {eps_ball})")]
    OutsideBall { norm_sq: f64, eps_ball: f64 },

    #[error("a ball point needs at least one coordinate")]
    ZeroDimension,

    #[error("empty node list")]
    EmptyNodes,

    #[error("nodes {i} and {j} coincide (distance {distance:e})")]
    DuplicateNodes { i: usize, j: usize, distance: f64 },

    #[error("{nodes} nodes but {values} values")]
    LengthMismatch { nodes: usize, values: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("Cholesky factorisation failed even with jitter {max_jitter:e}")]
    WhiteningFailed { max_jitter: f64 },

    #[error("node {a_index} of the first sample also appears as node {b_index} of the second")]
    OverlappingSamples { a_index: usize, b_index: usize },

    #[error("holomap has no components")]
    EmptyHolomap,

    #[error("transversality margin {margin:e} does not exceed {tolerance:e}")]
    NotTransversal { margin: f64, tolerance: f64 },

    #[error("kernel integrand blows up at grid nodes ({k}, {j}): |<h(k),h(j)>| = {modulus}")]
    IntegrandBlowUp { k: usize, j: usize, modulus: f64 },

    #[error(
        "holomap is boundary-normalized on part of the grid only (node {node}, |h|^2 = {norm_sq})"
    )]
    MixedBoundary { node: usize, norm_sq: f64 },

    #[error("grid of {n} nodes is too coarse, need at least {required}")]
    GridTooCoarse { n: usize, required: usize },

    #[error("invalid monomial map: {0}")]
    InvalidMonomialMap(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
