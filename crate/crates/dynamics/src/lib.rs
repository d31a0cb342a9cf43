//! Control-affine system models and the geometry used to lift surrogate
//! controllers: Lie derivatives, vector relative degree, the η chain
//! coordinates, the decoupling matrix, and the pointwise
//! feedback-linearizing control law.
//!
//! Symbolic matrix inverses are never formed. The decoupling matrix is kept
//! as expressions and inverted numerically at evaluation points, which keeps
//! rational/trig systems (robot arms) tractable.

mod decouple;
mod error;
mod eta;
mod reldeg;
mod system;

pub use decouple::{decoupling, feedback_linearize, DecouplingData};
pub use error::DynamicsError;
pub use eta::{build_eta_map, EtaMap};
pub use reldeg::{vector_relative_degree, RelativeDegreeProfile, ZeroTestConfig};
pub use system::{lie_derivative, ControlAffineSystem};

/// Singular values below `1e-10` (or |det| below it) mean the decoupling
/// matrix is treated as singular at that point.
pub const SINGULARITY_THRESHOLD: f64 = 1e-10;

/// Rank decisions discard singular values below this fraction of the largest.
pub const RANK_CUTOFF: f64 = 1e-8;
