//! Finite-volume laboratory for the two-dimensional Burgers equation
//!
//! ```text
//! ∂t u + ∂1(u²/2) + ∂2(u³/3) = 0
//! ```
//!
//! with nearly-singular (measure-like) initial data. The crate bundles a
//! monotone conservative scheme, factories for mollified measures and exact
//! oracles, a diagnostics harness for semigroup properties, support growth,
//! dispersive decay and moment estimates, and the self-similar machinery
//! (characteristics, very self-similar flows and their shock loci).

// `!(x > 0.0)` guards reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod diagnostics;
mod error;
pub mod experiments;
pub mod grid;
pub mod quadrature;
pub mod scheme;
pub mod selfsim;

pub use error::{Error, Result};
pub use grid::{lp_norm, Boundary, CellField, Constants, Grid2D, Rect};
