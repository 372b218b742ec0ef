use num_complex::Complex64;
use thiserror::Error;

/// Errors shared across the crate.
///
/// Numerical preconditions (invertibility, separation, classification) fail
/// loudly with a witness rather than silently degrading.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid character space: {0}")]
    InvalidSpace(String),

    #[error("elements live on different character spaces")]
    MixedSpaces,

    #[error("element is not invertible at point `{point}` (value {value})")]
    NotInvertible { point: String, value: Complex64 },

    #[error("logarithm undefined: value at point `{point}` lies on the branch cut")]
    LogOnCut { point: String },

    #[error("invalid polynomial: {0}")]
    InvalidPoly(String),

    #[error("polynomial degree {got} exceeds maximum {max}")]
    DegreeTooHigh { got: usize, max: usize },

    #[error("elements belong to different extensions")]
    MixedExtensions,

    #[error("candidate is not a root: |theta(alpha)(y)| = {residual:e}")]
    NotARoot { residual: f64 },

    #[error("point ({char_index}, {root_index}) is not in the fibration")]
    PointNotInFibration { char_index: usize, root_index: usize },

    #[error("root clustering is ill-conditioned at character `{point}`")]
    IllConditioned { point: String },

    #[error("radius {rho:e} does not separate the fibre at `{point}` (separation {separation:e})")]
    CannotSeparate { point: String, rho: f64, separation: f64 },

    #[error("no neighbourhood of `{point}` admits a trivialization")]
    DegenerateNeighborhood { point: String },

    #[error("sheet matching is ambiguous on edge ({a}, {b})")]
    AmbiguousMatching { a: String, b: String },

    #[error("construction too large: {size} points exceeds cap {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("tower stage too large")]
    StageTooLarge,

    #[error("stage indices out of order: {sigma} > {tau}")]
    IndexOrder { sigma: usize, tau: usize },

    #[error("e^h does not equal the embedded element: residual {residual:e}")]
    NotAnExpWitness { residual: f64 },

    #[error("value {value} at `{point}` is not near any {n}th root of unity")]
    UnclassifiablePoint {
        point: String,
        value: Complex64,
        n: usize,
    },

    #[error("argument step of {step:.4} rad on edge ({a}, {b}) is too coarse for winding")]
    SamplingTooCoarse { a: String, b: String, step: f64 },

    #[error("element vanishes on the loop at `{point}`")]
    NotInvertibleOnLoop { point: String },

    #[error("perturbation retries exhausted after {retries} draws")]
    RetriesExhausted { retries: usize },

    #[error("rescaling did not reach a compliant polynomial within {halvings} halvings")]
    NotReached { halvings: usize },

    #[error("norm parameter {t} admits no logarithm branch at `{point}` (needs >= {needed})")]
    NormParamTooSmall { point: String, t: f64, needed: f64 },

    #[error("scenario error: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
