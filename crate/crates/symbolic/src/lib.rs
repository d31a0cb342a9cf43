//! Symbolic scalar expressions over a fixed variable table, with sparse
//! multivariate polynomials as the structured special case.
//!
//! Everything here is immutable: operations return new values and never
//! mutate their inputs. Expression constructors perform only shallow
//! simplification (constant folding, dropping additive zeros and
//! multiplicative ones, collapsing `e^0`), so printed forms stay close to
//! what was written.

mod compile;
mod error;
mod expr;
mod parse;
mod poly;
mod vars;

pub use compile::CompiledExpr;
pub use error::SymbolicError;
pub use expr::Expression;
pub use parse::parse_expression;
pub use poly::{Degree, Polynomial};
pub use vars::VarTable;

/// Default sample count for the numeric fallback of
/// [`Expression::is_identically_zero`].
pub const DEFAULT_ZERO_SAMPLES: usize = 64;

/// Default absolute tolerance for the numeric zero test.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;
