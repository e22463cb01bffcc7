//! Numerical machinery for projectively equivalent metrics on closed
//! manifolds: expression-defined metrics and maps on single charts,
//! Levi-Civita connections and geodesics, projective/affine/isometric
//! classification of diffeomorphisms, weighted metrization solutions and
//! the 2×2 representation of projective transformations on a
//! two-dimensional solution space.
//!
//! The geometry is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases below fix `f64`, which every tolerance in
//! the verification pipeline assumes.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charts;
pub mod dual;
pub mod error;
pub mod expr;
pub mod geodesics;
pub mod linalg;
pub mod metrization;
pub mod projective;
pub mod real;
pub mod representation;
pub mod sampling;
pub mod scenario_file;
pub mod scenarios;

pub use charts::{Chart, Coordinate, CoordKind, Diffeomorphism, MetricField, Point, Signature};
pub use error::{Error, Result};
pub use expr::{parse, Expression};
pub use real::Real;

pub type Dual64 = dual::Dual<f64>;
pub type Matrix64 = linalg::Matrix<f64>;
pub type Point64 = charts::Point<f64>;
pub type Dual32 = dual::Dual<f32>;
pub type Matrix32 = linalg::Matrix<f32>;
