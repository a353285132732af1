//! Numerical machinery for generalized Stokes theorems on fields whose curl is a measure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod birkhoff_rott;
pub mod extrapolate;
pub mod fields;
pub mod geometry;
pub mod selection;
pub mod stokes;
pub mod traces;

pub use geometry::Vec3;
