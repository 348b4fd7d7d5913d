use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("empty point set")]
    Empty,
    #[error("duplicate points {0} and {1}")]
    DuplicatePoints(usize, usize),
    #[error("norm exponent p = {0} must lie in [1, inf]")]
    BadExponent(f64),
    #[error("graph is disconnected: vertex {0} unreachable from vertex 0")]
    Disconnected(usize),
    #[error("edge ({0}, {1}) has non-positive or non-finite weight {2}")]
    BadEdge(usize, usize, f64),
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("scale factor {0} must be positive and finite")]
    BadScale(f64),
    #[error("base point {0} is not contained in the subset")]
    BaseNotInSubset(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("map does not send base point to base point ({0} -> {1})")]
    BaseNotPreserved(usize, usize),
    #[error("support point {0} lies outside the subset")]
    SupportOutsideSubset(usize),
    #[error("not an extension operator: {0}")]
    NotAnExtension(String),
    #[error("linear program is infeasible")]
    LpInfeasible,
    #[error("linear program is unbounded")]
    LpUnbounded,
    #[error("simplex iteration limit reached after {0} pivots")]
    LpIterationLimit(usize),
    #[error("support point {point} at radius {radius} lies outside annulus ({inner}, {outer}]")]
    OutsideAnnulus { point: usize, radius: f64, inner: f64, outer: f64 },
    #[error("annulus exponents must satisfy r_1 < s_1 < r_2 < ... < s_n")]
    BadExponentSequence,
    #[error("pieces overlap away from the base point at {0}")]
    PiecesOverlap(usize),
    #[error("separation violated: cross distance {0} outside [{1}, {2}]")]
    SeparationViolated(f64, f64, f64),
    #[error("radial net: {0}")]
    RadialNet(String),
    #[error("decomposition infeasible: {0}")]
    DecompositionInfeasible(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
