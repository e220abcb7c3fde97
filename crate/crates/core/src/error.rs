//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Parameter outside the admissible domain (a > 0, beta and c in (0, 1),
    /// finite sizes consistent).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// a = 1 collapses the two covariance levels into one; the two-cut
    /// machinery is undefined there.
    #[error("degenerate covariance: a = 1 reduces to a single Marchenko-Pastur bulk")]
    DegenerateCovariance,

    /// The branch-point discriminant is inside the guard band around zero, so
    /// one-cut vs two-cut cannot be decided reliably.
    #[error("parameters too close to the one-cut/two-cut transition (|delta| = {delta:.3e} < {band:.3e})")]
    NearTransition { delta: f64, band: f64 },

    /// An operation that requires the two-cut phase was called in the one-cut
    /// phase.
    #[error("parameters are in the one-cut phase (delta = {delta:.3e} < 0)")]
    NotTwoCut { delta: f64 },

    /// Closed-form density requested outside the open support.
    #[error("point z = {z} is not in the open support of the density")]
    OffSupport { z: f64 },

    /// Branch continuation could not keep the sheets separated.
    #[error("branch tracking failed: {0}")]
    BranchTracking(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature failed: {0}")]
    Quadrature(String),

    /// Root finding did not meet its residual contract.
    #[error("root solve failed: {0}")]
    RootSolve(String),

    /// Finite-kernel sizes beyond the supported conditioning range.
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),
}
