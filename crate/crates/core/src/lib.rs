//! Extended hybridizable discontinuous Galerkin (X-HDG) discretizations of
//! two-dimensional elliptic interface problems on unfitted triangular meshes.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod assembly;
pub mod cases;
pub mod error;
pub mod geometry;
pub mod postproc;
pub mod quadrature;
pub mod solver;
pub mod spaces;
pub mod study;

pub use error::{Error, Result};

/// Point in the plane.
pub type Point = nalgebra::Vector2<f64>;
/// Vector in the plane.
pub type Vector = nalgebra::Vector2<f64>;
