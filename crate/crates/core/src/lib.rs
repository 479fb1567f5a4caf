//! Horizontal geometry of surfaces in the Heisenberg group.
//!
//! The crate computes frame data and horizontal mean curvature of surfaces
//! in H¹, evaluates first and second variations of the horizontal perimeter
//! both by closed formulas and by finite differences of the perimeter
//! itself, builds destabilizing deformations for strict graphical strips,
//! and reduces H-minimal (y,t)-graphs to graphical strips through their
//! seed curves. A small module treats vertical cylinders in Hⁿ.

pub mod bernstein;
pub mod domain;
pub mod error;
pub mod gexpr;
pub mod hcalc;
pub mod hgroup;
pub mod highdim;
pub mod instability;
pub mod roots;
pub mod surfaces;
pub mod variation;

pub use error::{Error, ErrorClass, Result};
