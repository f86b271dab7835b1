//! Convex planar four-body central configurations with two adjacent equal
//! mass pairs `(1, 1, α, α)`.
//!
//! The crate is `no_std` (it needs `alloc`) and purely computational: the
//! geometric kernel, the central-configuration residuals in position space
//! and in squared-distance coordinates, Newton-type solvers with a
//! brute-force trapezoid oracle, and predicates that check the symmetry
//! statements on computed solutions. File formats and the command-line
//! front end live in the `quadcc` crate.

#![no_std]
// `!(x > 0.0)` is the NaN-rejecting form throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ccequations;
pub mod classify;
pub mod error;
pub mod geometry;
pub mod identities;
mod linalg;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{OrientedAreaVector, PlanarConfiguration, Point, SquaredDistanceVector};
