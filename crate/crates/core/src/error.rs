use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("points too small: need at least {min} grid points, got {got}")]
    PointsTooSmall { got: usize, min: usize },
    #[error("period must be positive and finite, got {0}")]
    NonPositivePeriod(f64),
    #[error("grid mismatch: functions live on different grids")]
    GridMismatch,
    #[error("grid function value at node {node} is not finite")]
    NonFiniteValue { node: usize },
    #[error("invalid velocity grid: {0}")]
    InvalidVelocityGrid(String),
    #[error("invalid scheme parameters: {0}")]
    InvalidScheme(String),
    #[error("superlinearity budget exceeded: Fenchel argmax at p-grid boundary p = {p}")]
    SuperlinearityBudget { p: f64 },
    #[error("dL/du at u = 0 is positive ({value:e}) at x = {x}, v = {v}; monotonicity in u is violated")]
    PositiveDerivative { x: f64, v: f64, value: f64 },
    #[error("unknown model: {0}")]
    UnknownModel(String),
    #[error("invalid model parameter: {0}")]
    InvalidModelParameter(String),
    #[error("max_iter exceeded after {iterations} iterations, last residual {residual:e}")]
    MaxIterExceeded { iterations: usize, residual: f64 },
    #[error("unanchored critical solve: lambda = 0 requires at least one anchor node")]
    UnanchoredCriticalSolve,
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error("BIG = {big:e} does not dominate the largest reachable action {bound:e}")]
    BigTooSmall { big: f64, bound: f64 },
    #[error("liminf window too small: oscillation {amplitude:e} over the window exceeds {limit:e} (source node {source_node})")]
    LiminfWindowTooSmall { source_node: usize, amplitude: f64, limit: f64 },
    #[error("barrier table has no row for source node {0}")]
    MissingBarrierSource(usize),
    #[error("degenerate normalization: all occupation weights underflow")]
    DegenerateNormalization,
    #[error("empty calibrated path")]
    EmptyPath,
    #[error("bracket invalid: c(H^{lo}) = {c_lo} and c(H^{hi}) = {c_hi} do not straddle 0")]
    BracketInvalid { lo: f64, hi: f64, c_lo: f64, c_hi: f64 },
    #[error("linear program is infeasible")]
    LpInfeasible,
    #[error("linear program is unbounded")]
    LpUnbounded,
    #[error("linear program hit the iteration limit ({0} pivots)")]
    LpIterationLimit(usize),
    #[error("invalid linear program: {0}")]
    LpMalformed(String),
    #[error("optimal face is infeasible with face_tol = {face_tol:e}")]
    FaceInfeasible { face_tol: f64 },
    #[error("(L4) does not hold: max of the dL/du integral over the Mather face is {face_max:e}; the selection formula needs it strictly negative")]
    L4Fails { face_max: f64 },
}
