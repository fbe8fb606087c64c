use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid type space: {0}")]
    InvalidTypeSpace(String),

    #[error("probability vector has length {got}, expected {expected}")]
    WrongLength { expected: usize, got: usize },

    #[error("negative or non-finite probability mass {mass} at profile {index}")]
    NegativeMass { index: usize, mass: f64 },

    #[error("probabilities sum to {sum}, outside the accepted normalization band")]
    NotNormalized { sum: f64 },

    #[error("bidder {bidder} has zero marginal mass at value index {value}")]
    ZeroMarginal { bidder: usize, value: usize },

    #[error("eps must lie strictly between 0 and 1, got {0}")]
    BadEps(f64),

    #[error("truncation level h = {0} is out of range")]
    BadH(usize),

    #[error("bidders do not share a common value set")]
    HeterogeneousTypeSpaces,

    #[error("family is empty")]
    EmptyFamily,

    #[error("cannot build the requested family: {0}")]
    InfeasibleSizes(String),

    #[error("dimension {requested} exceeds the cap of {cap} entries")]
    DimensionOverflow { requested: u128, cap: usize },

    #[error("lottery system for bidder {bidder} has no solution (residual {residual:.3e})")]
    NoSolution { bidder: usize, residual: f64 },

    #[error("member {member} violates the Cremer-McLean condition for bidder {bidder}")]
    CmViolation { member: usize, bidder: usize },

    #[error("stacked conditional vectors stay rank deficient up to m = {max_m}")]
    RankDeficient { max_m: usize },

    #[error("profile is outside the type space: {0}")]
    ProfileOutOfSupport(String),

    #[error("operation supports {supported} bidders, got {got}")]
    UnsupportedBidderCount { supported: usize, got: usize },

    #[error("every family member assigns zero likelihood to the samples")]
    AllZeroLikelihood,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
