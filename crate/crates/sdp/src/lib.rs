//! Dense semidefinite programming for sum-of-squares synthesis.
//!
//! The embedded solver is a homogeneous self-dual interior-point method with
//! Nesterov-Todd scaling and a Mehrotra predictor-corrector. Problems mix
//! dense PSD blocks, diagonal (nonnegative) blocks, and free scalars; free
//! scalars are eliminated through the Schur complement inside the iteration
//! rather than split into sign pairs, which keeps the dual interior nonempty.
//! The pair splitting appears only in the SDPA file export, where external
//! solvers presolve it away.
//!
//! Everything is deterministic: no randomness, fixed summation orders, so a
//! problem solves to bitwise-identical iterates on every run.

mod blocks;
mod error;
mod problem;
mod sdpa;
mod solver;

pub use blocks::{Block, BlockMat};
pub use error::SdpError;
pub use problem::{SdpProblem, SdpSolution, SolveOptions, SolveStatus};
pub use sdpa::{export_sdpa, export_solution, import_solution};
pub use solver::solve;

/// Fraction-to-boundary factor for the combined step.
pub(crate) const GAMMA: f64 = 0.98;
