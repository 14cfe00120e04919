use crate::Point;

/// Errors raised by the numerical toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),

    #[error("polygon is not strictly convex and counter-clockwise at vertex {vertex}")]
    NonConvex { vertex: usize },

    #[error("vertex and weight counts differ ({vertices} vertices, {weights} weights)")]
    WeightCount { vertices: usize, weights: usize },

    #[error("edge {edge} has non-positive or non-finite weight {weight}")]
    BadWeight { edge: usize, weight: f64 },

    #[error("non-finite coordinate at vertex {0}")]
    NonFinite(usize),

    #[error("singular moment matrix while solving for the affine scalar curvature")]
    SingularMoments,

    #[error("cut depth {epsilon} is too large: it leaves adjacent edge {edge}")]
    CutTooDeep { edge: usize, epsilon: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("centroid map is rank-deficient for edges {first} and {second}; choose a different pair")]
    RankDeficient { first: usize, second: usize },

    #[error("root finding did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("endpoint data are not balanced (residual {residual:e})")]
    Unbalanced { residual: f64 },

    #[error("vertex counts differ along the path ({from} vs {to})")]
    VertexCountMismatch { from: usize, to: usize },

    #[error("Hessian is not positive definite at ({:.6}, {:.6})", .at.x, .at.y)]
    NotConvex { at: Point },

    #[error("point ({:.6}, {:.6}) lies outside the domain", .at.x, .at.y)]
    OutsideDomain { at: Point },

    #[error("segment I(p,q) leaves the domain at ({:.6}, {:.6})", .exit.x, .exit.y)]
    SegmentLeavesDomain { exit: Point },

    #[error("Legendre transform: {0}")]
    OutOfRange(String),

    #[error("grid graph is disconnected; {unreached} nodes unreachable from the source")]
    Disconnected { unreached: usize },

    #[error("linear solve failed: {0}; try refining the grid")]
    LinearSolve(String),

    #[error("line search exhausted after {halvings} halvings")]
    Stagnation { halvings: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
