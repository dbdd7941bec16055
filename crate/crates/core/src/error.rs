//! Error types shared by all shape-statistics modules.

use std::fmt;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, ShapeError>;

/// Everything that can go wrong during shape-space inference.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeError {
    /// A k-ad must have more than two landmarks.
    TooFewLandmarks { k: usize },
    /// Eigendecompositions are O(k^3); configurations beyond this size are rejected.
    TooManyLandmarks { k: usize, max: usize },
    /// All landmarks coincide, so centering yields the zero vector.
    DegenerateConfiguration,
    /// A preshape failed its centering or unit-norm invariant.
    InvalidPreshape { what: &'static str },
    /// An operation that averages over a sample received an empty one.
    EmptySample,
    /// Two samples being compared have different landmark counts.
    MismatchedLandmarkCounts { a: usize, b: usize },
    /// A test needs at least this many observations per sample.
    SampleTooSmall { needed: usize, got: usize },
    /// The pooled variance estimate in a variation test is exactly zero.
    DegenerateVariance,
    /// The top eigenvalue of the averaged embedding is not simple: the
    /// extrinsic mean set is not a singleton.
    FocalMean { gap: f64 },
    /// A matrix that must be self-adjoint is not.
    NotHermitian { max_asymmetry: f64 },
    /// The pooled coordinate covariance cannot be inverted. This typically
    /// means the samples are too small for the chart dimension (a sample of
    /// n k-ads spans at most n-1 of the 2k-4 tangent directions).
    SingularCovariance { condition: f64 },
    /// The estimated Hessian of the Frechet function is numerically singular.
    SingularLambda { condition: f64 },
    /// Eigenvalue iteration failed to converge.
    NumericalFailure { what: &'static str },
    /// A tangent vector is too long for the exponential map to be injective.
    OutOfInjectivityRadius { norm: f64 },
    /// The target lies at or beyond the cut locus of the base point, where
    /// the logarithm map is undefined.
    CutLocus,
    /// Karcher iteration did not reach the gradient tolerance.
    NoConvergence { iterations: usize, grad_norm: f64 },
    /// Argument outside a distribution function's domain.
    DomainError { what: &'static str },
}

impl fmt::Display for ShapeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeError::TooFewLandmarks { k } => {
                write!(f, "a k-ad needs at least 3 landmarks, got {k}")
            }
            ShapeError::TooManyLandmarks { k, max } => {
                write!(f, "k-ad has {k} landmarks, maximum supported is {max}")
            }
            ShapeError::DegenerateConfiguration => {
                write!(f, "degenerate configuration: all landmarks coincide")
            }
            ShapeError::InvalidPreshape { what } => write!(f, "invalid preshape: {what}"),
            ShapeError::EmptySample => write!(f, "sample is empty"),
            ShapeError::MismatchedLandmarkCounts { a, b } => {
                write!(f, "samples have different landmark counts ({a} vs {b})")
            }
            ShapeError::SampleTooSmall { needed, got } => {
                write!(f, "sample has {got} observations, test needs at least {needed}")
            }
            ShapeError::DegenerateVariance => {
                write!(f, "variance estimate is zero; variation test undefined")
            }
            ShapeError::FocalMean { gap } => write!(
                f,
                "averaged embedding is focal (top eigenvalue gap {gap:.3e}): \
                 extrinsic mean is not unique"
            ),
            ShapeError::NotHermitian { max_asymmetry } => {
                write!(f, "matrix is not self-adjoint (max asymmetry {max_asymmetry:.3e})")
            }
            ShapeError::SingularCovariance { condition } => write!(
                f,
                "coordinate covariance is singular or ill-conditioned \
                 (condition {condition:.3e}); samples may be too small for the \
                 2k-4 tangent dimensions"
            ),
            ShapeError::SingularLambda { condition } => {
                write!(f, "Hessian estimate is singular (condition {condition:.3e})")
            }
            ShapeError::NumericalFailure { what } => write!(f, "numerical failure: {what}"),
            ShapeError::OutOfInjectivityRadius { norm } => write!(
                f,
                "tangent vector norm {norm:.6} is outside the injectivity radius pi/2"
            ),
            ShapeError::CutLocus => {
                write!(f, "target is at or beyond the cut locus; log map undefined")
            }
            ShapeError::NoConvergence { iterations, grad_norm } => write!(
                f,
                "Karcher iteration did not converge after {iterations} steps \
                 (gradient norm {grad_norm:.3e})"
            ),
            ShapeError::DomainError { what } => write!(f, "domain error: {what}"),
        }
    }
}

impl std::error::Error for ShapeError {}
