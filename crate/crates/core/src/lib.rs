//! Numerical laboratory for blow-up of the heat equation with a local
//! nonlinear Neumann condition:
//!
//! ```text
//! u_t = Δu            in Ω × (0, T]
//! ∂u/∂n = u^q         on Γ₁ × (0, T]
//! ∂u/∂n = 0           on Γ₂ × (0, T]
//! u(·, 0) = u₀ ≥ 0    in Ω
//! ```
//!
//! The crate is organised by concern:
//!
//! - [`geometry`]: the shape catalog, boundary patches, `[Γ]_d`
//!   neighbourhoods and local-convexity detection.
//! - [`kernel`]: the heat kernel, its boundary-time integrals and the
//!   identities and estimates built on them, plus empirical constants.
//! - [`sequence`]: the `M_k` level construction and per-step time floors.
//! - [`bounds`]: closed-form lower and upper bounds on the blow-up time.
//! - [`solver`]: an explicit finite-difference simulator on the rectangle.
//! - [`experiments`]: configuration, sweeps, order fitting and constant
//!   estimation pipelines used by the command-line front end.

pub mod bounds;
pub mod experiments;
pub mod geometry;
pub mod kernel;
pub mod quad;
pub mod sequence;
pub mod solver;
pub mod special;

/// Points and vectors. Planar shapes use the `z = 0` plane.
pub type Point = nalgebra::Vector3<f64>;

pub use bounds::{BoundParams, BoundReport, BoundValue};
pub use geometry::{BoundaryPatch, Domain, DomainKind, PatchSpec, QuadNode};
pub use kernel::constants::{ConstantLedger, LedgerEntry, Provenance};
pub use quad::KernelIntegralResult;
pub use sequence::{SequenceParams, SequenceRun, SequenceVariant};
pub use solver::{SimConfig, SimResult, SimStatus};
