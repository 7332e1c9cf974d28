//! Exact symbolic engine for deciding whether a rigid real-analytic
//! hypersurface M⁹ ⊂ ℂ⁵ of Levi signature (2,2) obstructs holomorphic
//! bi-disks through the origin.
//!
//! The kernel is organized in layers:
//!
//! * [`rational`], [`context`], [`series`] — exact Gaussian-rational
//!   arithmetic and truncated multivariate power series at the origin;
//! * [`fiber`], [`kform`] — polynomials in the unitary fiber variables and
//!   the exterior algebra of forms over declared covector bases;
//! * [`pipeline`] — contact form, Levi matrix, adapted coframe, structure
//!   equations, torsion extraction, absorption, and the two obstruction
//!   functions together with the τ/Σ matrices;
//! * [`sommer`] — the floating-point bijection between isotropic planes of
//!   an indefinite Hermitian form and the matrices A with A*A = Id;
//! * [`u2`] — numerical minimization of the obstruction norm over U(2);
//! * [`parser`] — the textual defining-function language.

pub mod context;
pub mod error;
pub mod fiber;
pub mod kform;
pub mod parser;
pub mod pipeline;
pub mod rational;
pub mod series;
pub mod sommer;
pub mod u2;

pub use context::{BaseExp, BaseVar, VarContext, DEFAULT_ORDER};
pub use error::{AlgebraError, PipelineError};
pub use fiber::{FiberExp, FiberVar, UPoly};
pub use kform::{BasisKind, Covector, CovectorBasis, KForm};
pub use rational::GaussRational;
pub use series::Series;
