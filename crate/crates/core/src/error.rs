//! Error types shared across the kernel.

use thiserror::Error;

/// Errors from the exact-arithmetic and exterior-algebra layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("truncation order {0} is too small (need at least 2)")]
    OrderTooSmall(u32),
    #[error("operands belong to different variable contexts")]
    ContextMismatch,
    #[error("series is degenerate at the origin (zero constant term)")]
    DegenerateAtOrigin,
    #[error("square root branch undefined: constant term must be real, positive and a perfect rational square")]
    BranchError,
    #[error("verified degree exhausted: cannot differentiate further")]
    VerifiedDegreeExhausted,
    #[error("fiber degree {0} exceeds the configured cap {1}")]
    FiberDegreeCap(u32, u32),
    #[error("wedge product would exceed degree 3")]
    DegreeOverflow,
    #[error("form mixes base and coframe covectors")]
    MixedBasis,
    #[error("operation requires a form over base covectors")]
    NotBaseBasis,
    #[error("form contains dv but no contact form was supplied to eliminate it")]
    DvWithoutTheta,
}

/// Errors from the geometric pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("defining function is not real")]
    NotReal,
    #[error("defining function does not vanish at the origin")]
    NonzeroAtOrigin,
    #[error("defining function depends on v (only rigid hypersurfaces are supported)")]
    NotRigid,
    #[error("Levi matrix is singular at the origin")]
    LeviDegenerate,
    #[error("Levi signature at the origin is ({0},{1}), expected (2,2)")]
    WrongSignature(u32, u32),
    #[error("pivot {0} of the Levi matrix vanishes at the origin; the adapted coframe does not exist in this form")]
    PivotDegenerate(usize),
    #[error("internal invariant failure: {0}")]
    Internal(String),
}
