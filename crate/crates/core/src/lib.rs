//! Classical dynamics of separable superintegrable systems on two-dimensional
//! spaces of constant curvature.
//!
//! The crate covers the chart geometry, the isochronous radial families and
//! angular wells, action and period quadratures, a symplectic integrator with
//! closure diagnostics, Abel reconstruction of angular potentials and a
//! classifier for superintegrability.

// Negated comparisons are kept where they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abel;
pub mod actions;
pub mod classify;
pub mod csv;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod interp;
pub mod potentials;
pub mod quadrature;
pub mod rational;
pub mod roots;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::Curvature;
pub use rational::Rational;
